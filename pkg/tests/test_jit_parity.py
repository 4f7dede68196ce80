"""The interpreted kernels and the compiled ones must produce identical archives."""
import os
import subprocess
import sys

import pytest

SCRIPT = r"""
import hashlib, random, sys
from rpair import build_archive, compress
from rpair._jit import JIT_ENABLED
print("jit", JIT_ENABLED)
rng = random.Random(3)
cases = [b"abracadabra", b"a" * 300, bytes(rng.choice(b"abc") for _ in range(2000)),
         bytes(rng.randrange(256) for _ in range(1500))]
for data in cases:
    for engine, cap in [("small", None), ("stream", None), ("stream", 8)]:
        res = compress(data, engine=engine, lf_capacity=cap)
        blob = build_archive(res.grammar, res.final_text, len(data))[0]
        print(engine, cap, hashlib.sha1(blob).hexdigest())
"""


def _run(disable):
    env = dict(os.environ, RPAIR_DISABLE_JIT="1" if disable else "0")
    proc = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True,
                          text=True, timeout=900)
    assert proc.returncode == 0, proc.stderr
    return proc.stdout.splitlines()


@pytest.mark.slow
def test_interpreted_matches_compiled():
    jit = _run(False)
    plain = _run(True)
    assert jit[0] == "jit True" and plain[0] == "jit False"
    assert len(jit) == 13
    assert plain[1:] == jit[1:]
