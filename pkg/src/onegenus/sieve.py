"""Bit-packed congruence sieve over candidate negative discriminants.

A candidate |d| is eliminated once |d| = -x^2 (mod p) for some odd prime p
with x != 0 (mod p): then d is a nonzero quadratic residue mod p and, as soon
as 4p^2 < |d|, d = b^2 - 4pk yields the reduced non-ambiguous form (p, b, k),
so d cannot have one class per genus.

Residue conditions for the primes dividing two products P1, P2 are applied by
only enumerating surviving residues and combining them with the Chinese
remainder theorem.  For each remaining sieve prime q a table of 32-bit words
indexed by a mod q marks whether a + k*P1*P2 is eliminated by q in bit k, so
a single OR applies q's condition to 32 candidates.

Eliminations are only trusted for |d| >= small_cutoff (which must exceed
4*q^2 for every configured prime); everything below the cutoff is passed
through as a survivor for direct checking.
"""
from __future__ import annotations

import hashlib
import json
import math
import multiprocessing
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .arith import is_prime, primes_up_to, sqrt_mod_prime
from .errors import CheckpointMismatch, InternalCheckError
from .forms import QuadForm, validate_discriminant

WORD_WIDTH = 32
DEFAULT_P1 = (3, 5, 7, 11, 13, 17, 19)
DEFAULT_P2 = (23, 29, 31, 37, 41, 43, 47)

_N_CHUNKS = 64            # fixed outer-loop partition; checkpoint granularity
_BLOCK = 1 << 19          # candidate words processed per vectorized pass
_MATERIALIZE_LIMIT = 1 << 22   # residue sets larger than this are generated lazily

_LOW_MASKS = np.array([(1 << k) - 1 for k in range(33)], dtype=np.uint64).astype(np.uint32)


def default_sieve_primes() -> tuple[int, ...]:
    """The 16th through 169th primes, 53..1009."""
    return tuple(primes_up_to(1009)[15:])


def _popcount_sum(words: np.ndarray) -> int:
    return int(np.bitwise_count(words).sum())


@dataclass(frozen=True)
class SieveConfig:
    p1_primes: tuple[int, ...] = DEFAULT_P1
    p2_primes: tuple[int, ...] = DEFAULT_P2
    sieve_primes: tuple[int, ...] = field(default_factory=default_sieve_primes)
    limit: int = 10**6
    small_cutoff: int = 10**7
    word_width: int = WORD_WIDTH
    cadence: int = 8

    def __post_init__(self):
        object.__setattr__(self, "p1_primes", tuple(sorted(self.p1_primes)))
        object.__setattr__(self, "p2_primes", tuple(sorted(self.p2_primes)))
        object.__setattr__(self, "sieve_primes", tuple(sorted(self.sieve_primes)))
        allp = self.p1_primes + self.p2_primes + self.sieve_primes
        if len(set(allp)) != len(allp):
            raise ValueError("p1, p2 and sieve primes must be pairwise distinct")
        for p in allp:
            if p == 2 or not is_prime(p):
                raise ValueError(f"{p} is not an odd prime")
        if not self.p1_primes or not self.p2_primes:
            raise ValueError("both prime products must be non-empty")
        if self.word_width != WORD_WIDTH:
            raise ValueError("word width is fixed at 32")
        if self.cadence < 1:
            raise ValueError("cadence must be >= 1")
        if self.limit < 0:
            raise ValueError("limit must be non-negative")
        if self.limit >= self.small_cutoff and allp:
            worst = 4 * max(allp) ** 2
            if self.small_cutoff <= worst:
                raise ValueError(
                    f"small_cutoff {self.small_cutoff} does not dominate 4*p^2 = {worst}; "
                    "eliminations below that are not certified by a witness form"
                )

    @property
    def p1_product(self) -> int:
        return math.prod(self.p1_primes)

    @property
    def p2_product(self) -> int:
        return math.prod(self.p2_primes)

    @property
    def modulus(self) -> int:
        return self.p1_product * self.p2_product

    @property
    def coverage(self) -> int:
        return self.word_width * self.modulus

    def canonical(self) -> dict:
        return {
            "p1_primes": list(self.p1_primes),
            "p2_primes": list(self.p2_primes),
            "sieve_primes": list(self.sieve_primes),
            "limit": self.limit,
            "small_cutoff": self.small_cutoff,
            "word_width": self.word_width,
            "cadence": self.cadence,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


def survivor_residues(p: int) -> list[int]:
    """Residues a mod p that are *not* congruent to -x^2 for any x != 0 mod p."""
    bad = bytearray(p)
    for x in range(1, p):
        bad[(-x * x) % p] = 1
    return [r for r in range(p) if not bad[r]]


def eliminated_residues(p: int) -> np.ndarray:
    """Boolean lookup over residues mod p; True where p eliminates."""
    bad = np.zeros(p, dtype=bool)
    for x in range(1, p):
        bad[(-x * x) % p] = True
    return bad


def crt_combine(r1: int, m1: int, r2: int, m2: int) -> int:
    """Unique x in [0, m1*m2) with x = r1 (mod m1) and x = r2 (mod m2)."""
    if math.gcd(m1, m2) != 1:
        raise ValueError(f"moduli {m1}, {m2} are not coprime")
    x = r1 + m1 * ((r2 - r1) * pow(m1, -1, m2) % m2)
    return x % (m1 * m2)


def survivors_mod(primes) -> list[int]:
    """Ascending residues mod prod(primes) surviving every per-prime condition."""
    primes = list(primes)
    if not primes:
        return [0]
    if len(set(primes)) != len(primes):
        raise ValueError("primes must be distinct")
    total = math.prod((p + 1) // 2 for p in primes)
    if total > 5 * 10**7:
        raise ValueError(f"survivor set of size {total} is too large to materialize")
    vals = [0]
    mod = 1
    for p in primes:
        if p == 2 or not is_prime(p):
            raise ValueError(f"{p} is not an odd prime")
        res = survivor_residues(p)
        inv = pow(mod, -1, p)
        vals = [v + mod * ((r - v) * inv % p) for v in vals for r in res]
        mod *= p
    vals.sort()
    return vals


@dataclass
class BitTables:
    """Per-prime arrays of 32-bit words; word[a] bit k covers a + k*P1*P2."""

    modulus: int
    words: dict[int, np.ndarray]


def build_bit_tables(config: SieveConfig) -> BitTables:
    m = config.modulus
    words = {}
    ks = np.arange(WORD_WIDTH, dtype=np.int64)
    shifts = np.arange(WORD_WIDTH, dtype=np.uint32)
    for q in config.sieve_primes:
        bad = eliminated_residues(q)
        idx = (np.arange(q, dtype=np.int64)[:, None] + ks[None, :] * (m % q)) % q
        bits = bad[idx].astype(np.uint32) << shifts[None, :]
        words[q] = np.bitwise_or.reduce(bits, axis=1)
    return BitTables(m, words)


@dataclass(frozen=True)
class Witness:
    form: QuadForm
    reduced_nonambiguous: bool


def witness_form(d: int, p: int) -> Witness:
    """The form (p, b, k) certifying that d fails one class per genus.

    Requires p odd prime, p not dividing d, and d a nonzero quadratic residue
    mod p.  The result is reduced and non-ambiguous exactly when k > p, which
    is guaranteed once 4p^2 < |d|; otherwise it is flagged and the caller must
    not count d as eliminated.
    """
    validate_discriminant(d)
    if p == 2 or not is_prime(p):
        raise ValueError(f"{p} is not an odd prime")
    if d % p == 0:
        raise ValueError(f"{p} divides {d}")
    x0 = sqrt_mod_prime(d % p, p)  # raises when d is not a nonzero QR mod p
    b = x0 if x0 % 2 == d % 2 else p - x0
    num = b * b - d
    if num % (4 * p):
        raise InternalCheckError(f"witness construction failed for d={d}, p={p}")
    k = num // (4 * p)
    form = QuadForm(p, b, k)
    if form.discriminant() != d:
        raise InternalCheckError("witness form has wrong discriminant")
    return Witness(form=form, reduced_nonambiguous=k > p)


@dataclass
class SieveOutcome:
    survivors: list[int]
    eliminated_count: int
    tested_count: int
    per_prime_tally: dict[int, int]
    config: SieveConfig
    completed: bool = True
    direct_count: int = 0
    words_processed: int = 0
    stream_valid: int = 0

    def survivor_rows(self):
        """CSV rows (abs_d, mod4_class, passed_sieve), ascending."""
        cutoff = self.config.small_cutoff
        for n in self.survivors:
            yield n, n % 4, 1 if n >= cutoff else 0


def count_valid(limit: int) -> int:
    """Number of valid |d| <= limit, i.e. |d| >= 3 with |d| = 0 or 3 (mod 4)."""
    if limit < 3:
        return 0
    return (limit // 4) * 2 + (1 if limit % 4 >= 3 else 0)


def _direct_values(config: SieveConfig) -> np.ndarray:
    end = min(config.small_cutoff, config.limit + 1)
    if end <= 3:
        return np.empty(0, dtype=np.int64)
    vals = np.concatenate(
        [np.arange(3, end, 4, dtype=np.int64), np.arange(4, end, 4, dtype=np.int64)]
    )
    vals.sort()
    return vals


def _pstage_scan(config: SieveConfig) -> tuple[int, int, dict[int, int]]:
    """Tally eliminations by the P1/P2 residue stage over the trusted range.

    Returns (valid_total, alive_total, per-prime tallies), crediting each
    eliminated candidate to the smallest prime that hits it.
    """
    primes = sorted(config.p1_primes + config.p2_primes)
    tallies = {p: 0 for p in primes}
    lo = max(config.small_cutoff, 3)
    hi = config.limit
    if hi < lo:
        return 0, 0, tallies
    luts = {p: eliminated_residues(p) for p in primes}
    valid_total = 0
    alive_total = 0
    for start in range(lo, hi + 1, 1 << 22):
        v = np.arange(start, min(start + (1 << 22), hi + 1), dtype=np.int64)
        r4 = v & 3
        alive = (r4 == 0) | (r4 == 3)
        valid_total += int(alive.sum())
        for p in primes:
            hit = luts[p][v % p] & alive
            tallies[p] += int(hit.sum())
            alive &= ~hit
        alive_total += int(alive.sum())
    return valid_total, alive_total, tallies


class _Runner:
    """Precomputed stream state shared by all workers (inherited via fork)."""

    def __init__(self, config: SieveConfig):
        self.config = config
        m1, m2 = config.p1_product, config.p2_product
        self.m = m = m1 * m2
        c1 = m2 * pow(m2, -1, m1) % m
        c2 = m1 * pow(m1, -1, m2) % m

        outer = survivors_mod(config.p1_primes)
        self.n_outer = len(outer)
        self.outer_base = np.array([(r * c1) % m for r in outer], dtype=np.int64)

        # mixed-radix CRT contributions for the inner product, first prime fastest
        self.inner_counts = []
        self.inner_contribs = []
        for p in config.p2_primes:
            e = (m2 // p) * pow(m2 // p, -1, p)
            res = survivor_residues(p)
            self.inner_counts.append(len(res))
            self.inner_contribs.append(
                np.array([((r * e) % m2) * c2 % m for r in res], dtype=np.int64)
            )
        self.n_inner = math.prod(self.inner_counts)

        tables = build_bit_tables(config)
        self.primes = list(config.sieve_primes)
        self.tables = [tables.words[q] for q in self.primes]

        mm4 = m % 4
        self.mod4_masks = np.zeros(4, dtype=np.uint32)
        for r in range(4):
            mask = 0
            for k in range(WORD_WIDTH):
                if (r + k * mm4) % 4 in (0, 3):
                    mask |= 1 << k
            self.mod4_masks[r] = mask

        self.lo_t = max(config.small_cutoff, 3)
        if self.n_inner <= _MATERIALIZE_LIMIT:
            self.contrib = self._gen_contrib(np.arange(self.n_inner, dtype=np.int64))
        else:
            self.contrib = None

    def _gen_contrib(self, idx: np.ndarray) -> np.ndarray:
        acc = np.zeros(idx.shape, dtype=np.int64)
        rem = idx.copy()
        for count, contribs in zip(self.inner_counts, self.inner_contribs):
            acc += contribs[rem % count]
            rem //= count
        return acc % self.m

    def process_range(self, lo: int, hi: int):
        """Sieve outer indices [lo, hi); returns survivors and per-prime credits."""
        survivors: list[int] = []
        tally = np.zeros(len(self.primes), dtype=np.int64)
        stream_valid = 0
        words = 0
        for o in range(lo, hi):
            base = int(self.outer_base[o])
            if self.contrib is not None:
                for s in range(0, self.n_inner, _BLOCK):
                    a = base + self.contrib[s : s + _BLOCK]
                    stream_valid += self._sieve_block(a, survivors, tally)
                    words += min(_BLOCK, self.n_inner - s)
            else:
                for s in range(0, self.n_inner, _BLOCK):
                    idx = np.arange(s, min(s + _BLOCK, self.n_inner), dtype=np.int64)
                    a = base + self._gen_contrib(idx)
                    stream_valid += self._sieve_block(a, survivors, tally)
                    words += idx.size
        return survivors, tally, stream_valid, words

    def _sieve_block(self, a: np.ndarray, out: list[int], tally: np.ndarray) -> int:
        m = self.m
        a = np.where(a >= m, a - m, a)
        # bits k with lo_t <= a + k*m <= limit and the mod-4 condition
        kmin = np.maximum(0, -((a - self.lo_t) // m))
        kmax = np.minimum(WORD_WIDTH - 1, (self.config.limit - a) // m)
        vm = np.where(
            kmax >= kmin,
            _LOW_MASKS[np.minimum(kmax + 1, WORD_WIDTH)] & ~_LOW_MASKS[np.minimum(kmin, WORD_WIDTH)],
            np.uint32(0),
        )
        vm &= self.mod4_masks[a & 3]
        stream_valid = _popcount_sum(vm)
        keep = np.flatnonzero(vm)
        if keep.size == 0:
            return stream_valid
        a, vm = a[keep], vm[keep]
        w = np.zeros(a.shape, dtype=np.uint32)
        cadence = self.config.cadence
        n_primes = len(self.primes)
        for i in range(n_primes):
            t = self.tables[i][a % self.primes[i]]
            credited = t & ~w & vm
            tally[i] += _popcount_sum(credited)
            w |= t
            if (i + 1) % cadence == 0 and i + 1 < n_primes:
                keep = np.flatnonzero((~w & vm) != 0)
                if keep.size == 0:
                    return stream_valid
                if keep.size < a.size:
                    a, vm, w = a[keep], vm[keep], w[keep]
        rem = ~w & vm
        for j in np.flatnonzero(rem):
            bits = int(rem[j])
            aj = int(a[j])
            while bits:
                k = (bits & -bits).bit_length() - 1
                out.append(aj + k * m)
                bits &= bits - 1
        return stream_valid


_WORKER_RUNNER: _Runner | None = None


def _worker_task(span):
    return _WORKER_RUNNER.process_range(*span)


def _write_checkpoint(path: str, data: dict) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(data, fh, sort_keys=True, indent=1)
        fh.write("\n")
    os.replace(tmp, path)


def run_sieve(
    config: SieveConfig,
    workers: int = 1,
    checkpoint_path: str | None = None,
    resume: bool = False,
    max_chunks: int | None = None,
    progress: bool = False,
) -> SieveOutcome:
    """Run the sieve up to config.limit.

    Candidates below small_cutoff are emitted as survivors for direct
    checking; candidates in [small_cutoff, limit] are eliminated when some
    configured prime hits them, the elimination being credited to the
    smallest such prime.  Deterministic for any worker count.  With
    max_chunks set, stops early after that many outer-loop chunks (state goes
    to the checkpoint; the partial outcome is flagged completed=False).
    """
    if config.limit > config.coverage:
        raise ValueError(
            f"limit {config.limit} exceeds coverage {config.coverage} = 32*P1*P2"
        )

    direct = _direct_values(config)
    valid_total, alive_total, p_tallies = _pstage_scan(config)

    stream_survivors: list[int] = []
    bit_tally = np.zeros(len(config.sieve_primes), dtype=np.int64)
    stream_valid = 0
    words = 0
    chunks_done = 0
    chunks: list[tuple[int, int]] = []

    need_stream = config.limit >= config.small_cutoff
    runner = None
    if need_stream:
        runner = _Runner(config)
        chunk_size = max(1, -(-runner.n_outer // _N_CHUNKS))
        chunks = [
            (lo, min(lo + chunk_size, runner.n_outer))
            for lo in range(0, runner.n_outer, chunk_size)
        ]

    surv_file = (checkpoint_path + ".survivors") if checkpoint_path else None
    if resume:
        if not checkpoint_path or not os.path.exists(checkpoint_path):
            raise CheckpointMismatch("resume requested but checkpoint file is missing")
        with open(checkpoint_path) as fh:
            ck = json.load(fh)
        if ck.get("config_hash") != config.config_hash():
            raise CheckpointMismatch(
                f"checkpoint hash {ck.get('config_hash')} does not match config "
                f"{config.config_hash()}"
            )
        chunks_done = int(ck["chunks_done"])
        stream_valid = int(ck["stream_valid"])
        words = int(ck["words_processed"])
        bit_tally = np.array(ck["bit_tally"], dtype=np.int64)
        if surv_file and os.path.exists(surv_file):
            with open(surv_file) as fh:
                stream_survivors = [int(line) for line in fh if line.strip()]
    elif surv_file and os.path.exists(surv_file):
        os.remove(surv_file)

    def checkpoint(outer_index: int) -> None:
        if not checkpoint_path:
            return
        eliminated_so_far = int(sum(p_tallies.values()) + bit_tally.sum())
        _write_checkpoint(
            checkpoint_path,
            {
                "config_hash": config.config_hash(),
                "outer_index": outer_index,
                "chunks_done": chunks_done,
                "eliminated_count": eliminated_so_far,
                "tested_count": int(direct.size) + valid_total,
                "survivors_so_far_file": surv_file,
                "per_prime_tally": {str(p): int(c) for p, c in p_tallies.items()},
                "bit_tally": [int(x) for x in bit_tally],
                "stream_valid": stream_valid,
                "words_processed": words,
            },
        )

    pending = chunks[chunks_done:]
    stopped = False
    if pending and max_chunks is not None and max_chunks <= 0:
        stopped = True
        pending = []

    def consume(result, span):
        nonlocal stream_valid, words, chunks_done, bit_tally
        surv, tally, sv, wd = result
        stream_survivors.extend(surv)
        bit_tally += tally
        stream_valid += sv
        words += wd
        chunks_done += 1
        if surv_file:
            with open(surv_file, "a") as fh:
                fh.writelines(f"{v}\n" for v in surv)
        checkpoint(span[1])
        if progress:
            print(
                f"[sieve] chunk {chunks_done}/{len(chunks)} "
                f"(outer {span[1]}/{runner.n_outer}), "
                f"stream survivors so far: {len(stream_survivors)}",
                file=sys.stderr,
            )

    if pending:
        budget = len(pending) if max_chunks is None else min(max_chunks, len(pending))
        todo = pending[:budget]
        stopped = budget < len(pending)
        try:
            ctx = multiprocessing.get_context("fork")
        except ValueError:  # no fork on this platform; run sequentially
            ctx = None
        if workers > 1 and len(todo) > 1 and ctx is not None:
            global _WORKER_RUNNER
            _WORKER_RUNNER = runner
            with ctx.Pool(processes=workers) as pool:
                for span, result in zip(todo, pool.imap(_worker_task, todo)):
                    consume(result, span)
            _WORKER_RUNNER = None
        else:
            for span in todo:
                consume(runner.process_range(*span), span)

    if stopped:
        return SieveOutcome(
            survivors=sorted(stream_survivors),
            eliminated_count=int(sum(p_tallies.values()) + bit_tally.sum()),
            tested_count=int(direct.size) + valid_total,
            per_prime_tally={p: int(c) for p, c in p_tallies.items()},
            config=config,
            completed=False,
            direct_count=int(direct.size),
            words_processed=words,
            stream_valid=stream_valid,
        )

    if need_stream and stream_valid != alive_total:
        raise InternalCheckError(
            f"stream covered {stream_valid} valid candidates, residue scan expected {alive_total}"
        )

    survivors = sorted(int(v) for v in direct) + sorted(stream_survivors)
    survivors.sort()
    tally = {p: int(c) for p, c in p_tallies.items()}
    for q, c in zip(config.sieve_primes, bit_tally):
        tally[q] = int(c)
    eliminated = int(sum(tally.values()))
    tested = int(direct.size) + valid_total

    if tested != len(survivors) + eliminated:
        raise InternalCheckError(
            f"partition broken: tested {tested} != survivors {len(survivors)} + eliminated {eliminated}"
        )
    if tested != count_valid(config.limit):
        raise InternalCheckError(
            f"tested {tested} != closed-form count {count_valid(config.limit)}"
        )

    return SieveOutcome(
        survivors=survivors,
        eliminated_count=eliminated,
        tested_count=tested,
        per_prime_tally=tally,
        config=config,
        completed=True,
        direct_count=int(direct.size),
        words_processed=words,
        stream_valid=stream_valid,
    )


def benchmark_stream(config: SieveConfig, min_words: int = 1 << 21) -> dict:
    """Time the packed inner loop until at least min_words words are processed.

    Returns words/second and candidate tests/second (32 per word); used for
    throughput regression tracking, not for correctness.
    """
    runner = _Runner(config)
    words = 0
    outer = 0
    t0 = time.perf_counter()
    while words < min_words and outer < runner.n_outer:
        hi = min(outer + 8, runner.n_outer)
        _, _, _, w = runner.process_range(outer, hi)
        words += w
        outer = hi
    dt = time.perf_counter() - t0
    return {
        "words": words,
        "seconds": dt,
        "words_per_second": words / dt if dt else float("inf"),
        "tests_per_second": 32 * words / dt if dt else float("inf"),
    }
