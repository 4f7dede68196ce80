"""Re-Pair grammar compression in about (1.5 + epsilon) n words of working memory."""
from .archive import archive_stats, build_archive, decompress, expand, read_archive, write_archive
from .cluster import ClusterTables, cluster
from .codec import (decode_grammar, elias_delta_decode, elias_delta_encode, encode_grammar,
                    lower_bound)
from .core import CompressionResult, CompressionStats, Grammar, compress, initial_count_hf
from .errors import (AlphabetError, ArchiveError, CapacityError, ContractError, DecodeError,
                     PositionError, RepairError)
from .hfqueue import HFQueue
from .lfqueue import LFQueue
from .oracle import naive_compress
from .text import SkippableText


def compress_bytes(data, epsilon=0.25):
    """Compress to archive bytes."""
    res = compress(data, epsilon=epsilon)
    return build_archive(res.grammar, res.final_text, len(data))[0]


__all__ = [
    "AlphabetError", "ArchiveError", "CapacityError", "ClusterTables", "CompressionResult",
    "CompressionStats", "ContractError", "DecodeError", "Grammar", "HFQueue", "LFQueue",
    "PositionError", "RepairError", "SkippableText", "archive_stats", "build_archive", "cluster",
    "compress", "compress_bytes", "decode_grammar", "decompress", "elias_delta_decode",
    "elias_delta_encode", "encode_grammar", "expand", "initial_count_hf", "lower_bound",
    "naive_compress", "read_archive", "write_archive",
]
