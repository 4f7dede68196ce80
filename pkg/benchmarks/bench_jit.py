"""Compiled kernels against the interpreted fallback.

Each measurement runs in a fresh interpreter so ``RPAIR_DISABLE_JIT`` takes
effect; compile time is excluded by a warm-up call on a tiny input.

    python benchmarks/bench_jit.py --sizes 2000 8000 32000
"""
import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
from rpair import compress, corpora
n, corpus, engine = int(sys.argv[1]), sys.argv[2], sys.argv[3]
gen = {"english": corpora.english_like, "fib": corpora.fibonacci_word,
       "dup": corpora.duplicated_documents, "random": corpora.random_bytes}[corpus]
data = gen(n)
compress(b"abracadabra abracadabra", engine=engine)
t0 = time.perf_counter()
res = compress(data, engine=engine)
secs = time.perf_counter() - t0
print(json.dumps({"secs": secs, "d": res.stats.d, "t": res.stats.t}))
"""


def measure(n, corpus, engine, jit):
    env = dict(os.environ, RPAIR_DISABLE_JIT="0" if jit else "1")
    proc = subprocess.run([sys.executable, "-c", CHILD, str(n), corpus, engine], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[2000, 8000, 32000])
    ap.add_argument("--corpus", default="english", choices=["english", "fib", "dup", "random"])
    ap.add_argument("--engine", default="stream", choices=["small", "stream"])
    args = ap.parse_args(argv)
    print(f"{'n':>9} {'jit s':>9} {'python s':>10} {'speedup':>8}  same output")
    for n in args.sizes:
        fast = measure(n, args.corpus, args.engine, True)
        slow = measure(n, args.corpus, args.engine, False)
        same = (fast["d"], fast["t"]) == (slow["d"], slow["t"])
        print(f"{n:>9} {fast['secs']:>9.4f} {slow['secs']:>10.3f} "
              f"{slow['secs'] / max(fast['secs'], 1e-9):>8.0f}  {same}")


if __name__ == "__main__":
    main()
