"""Hot inner loops: MinHash signature scans and windowed token matching.

Both kernels ship in two flavors: a numba ``@njit`` version and a pure
numpy/Python fallback. Selection happens at import time from the
``OMISSIS_FORGE_JIT`` environment variable ("0"/"false"/"off" disables the
JIT path) and from whether numba is importable at all. ``benchmarks/``
compares the two paths on realistic sizes.

``OMISSIS_FORGE_THREADS`` caps worker-thread counts elsewhere in the
package; it lives here with the other runtime knobs.
"""

from __future__ import annotations

import os

import numpy as np

_MIX_MULT_1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX_MULT_2 = np.uint64(0x94D049BB133111EB)
_U64_MAX = np.uint64(0xFFFFFFFFFFFFFFFF)


def _jit_requested() -> bool:
    value = os.environ.get("OMISSIS_FORGE_JIT", "").strip().lower()
    return value not in ("0", "false", "off", "no")


JIT_REQUESTED = _jit_requested()

if JIT_REQUESTED:
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:
        HAS_NUMBA = False
else:
    HAS_NUMBA = False

JIT_ENABLED = JIT_REQUESTED and HAS_NUMBA


def thread_cap() -> int:
    """Worker-thread ceiling, from OMISSIS_FORGE_THREADS (default: cpu count)."""
    raw = os.environ.get("OMISSIS_FORGE_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            n = 0
        if n >= 1:
            return n
    return os.cpu_count() or 1


# --- MinHash scan -----------------------------------------------------------
#
# out[i] = min over shingles s of mix64(mults[i] * s + adds[i]), all uint64
# wraparound arithmetic. mix64 is the splitmix64 finalizer, a bijection on
# uint64, so each (mult, add) pair induces an independent pseudo-random
# ordering of the shingle universe.


def _minhash_scan_numpy(shingles: np.ndarray, mults: np.ndarray, adds: np.ndarray) -> np.ndarray:
    out = np.full(mults.shape[0], _U64_MAX, dtype=np.uint64)
    # Chunk the broadcast so signatures of very large documents stay cheap.
    block = 8192
    for start in range(0, shingles.shape[0], block):
        s = shingles[start : start + block]
        z = mults[:, None] * s[None, :] + adds[:, None]
        z ^= z >> np.uint64(30)
        z *= _MIX_MULT_1
        z ^= z >> np.uint64(27)
        z *= _MIX_MULT_2
        z ^= z >> np.uint64(31)
        np.minimum(out, z.min(axis=1), out=out)
    return out


if JIT_ENABLED:

    @njit(cache=True, nogil=True)
    def _minhash_scan_jit(shingles, mults, adds):  # pragma: no cover - jitted
        num_perms = mults.shape[0]
        count = shingles.shape[0]
        out = np.empty(num_perms, dtype=np.uint64)
        for i in range(num_perms):
            a = mults[i]
            b = adds[i]
            best = _U64_MAX
            for j in range(count):
                z = a * shingles[j] + b
                z ^= z >> np.uint64(30)
                z *= _MIX_MULT_1
                z ^= z >> np.uint64(27)
                z *= _MIX_MULT_2
                z ^= z >> np.uint64(31)
                if z < best:
                    best = z
            out[i] = best
        return out


def minhash_scan(shingles: np.ndarray, mults: np.ndarray, adds: np.ndarray) -> np.ndarray:
    """Per-permutation minima of the mixed shingle hashes."""
    if JIT_ENABLED:
        return _minhash_scan_jit(shingles, mults, adds)
    return _minhash_scan_numpy(shingles, mults, adds)


# --- Windowed token matching -------------------------------------------------
#
# For each clear token id, scan the redacted stream in the W positions after
# the latest match; a hit (equal id, never the redaction placeholder) keeps
# the token and advances the cursor, a frequency-table hit keeps it without
# advancing, anything else is marked redacted (keep[i] stays False).


def _window_match_python(
    clear_ids: np.ndarray,
    obf_ids: np.ndarray,
    in_common: np.ndarray,
    placeholder_id: int,
    window: int,
) -> np.ndarray:
    n = clear_ids.shape[0]
    m = obf_ids.shape[0]
    keep = np.zeros(n, dtype=np.bool_)
    latest = -1
    for i in range(n):
        target = clear_ids[i]
        hit = -1
        stop = min(latest + window, m - 1)
        for j in range(latest + 1, stop + 1):
            if obf_ids[j] == target and obf_ids[j] != placeholder_id:
                hit = j
                break
        if hit >= 0:
            keep[i] = True
            latest = hit
        elif in_common[i]:
            keep[i] = True
    return keep


if JIT_ENABLED:

    @njit(cache=True, nogil=True)
    def _window_match_jit(clear_ids, obf_ids, in_common, placeholder_id, window):  # pragma: no cover - jitted
        n = clear_ids.shape[0]
        m = obf_ids.shape[0]
        keep = np.zeros(n, dtype=np.bool_)
        latest = -1
        for i in range(n):
            target = clear_ids[i]
            hit = -1
            stop = latest + window
            if stop >= m:
                stop = m - 1
            for j in range(latest + 1, stop + 1):
                if obf_ids[j] == target and obf_ids[j] != placeholder_id:
                    hit = j
                    break
            if hit >= 0:
                keep[i] = True
                latest = hit
            elif in_common[i]:
                keep[i] = True
        return keep


def window_match(
    clear_ids: np.ndarray,
    obf_ids: np.ndarray,
    in_common: np.ndarray,
    placeholder_id: int,
    window: int,
) -> np.ndarray:
    """Boolean keep-mask over clear tokens; False marks a redacted position."""
    if JIT_ENABLED:
        return _window_match_jit(
            clear_ids, obf_ids, in_common, np.int64(placeholder_id), np.int64(window)
        )
    return _window_match_python(clear_ids, obf_ids, in_common, placeholder_id, window)
