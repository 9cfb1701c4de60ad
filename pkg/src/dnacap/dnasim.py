"""Desk-scale stochastic simulator of the DNA storage channel.

A codeword is M molecules of L symbols.  Reading samples N molecule
indices uniformly with replacement, sequences each sampled molecule
symbol-by-symbol through the channel, and hands the unordered stack of
reads to the decoder.  The decoder is the penalized maximum empirical
mutual information rule: it scans candidate index vectors, scores each by
sampling-weighted empirical mutual information plus input-type divergence,
and subtracts (M - q_0) log M for the ordering ambiguity of its
amplification class.
"""

from dataclasses import dataclass
from math import comb, factorial, lgamma, log

import numpy as np

from .channel import Dmc
from .errors import (
    EnumerationCapExceeded,
    InconsistentCandidate,
    InvalidAmplificationVector,
    InvalidDistribution,
)
from .infotheory import _probs

WILSON_Z = 1.959963984540054  # 97.5% normal quantile


@dataclass(frozen=True)
class SamplingRealization:
    """One sampling event: index vector u, duplicate vector s, and
    amplification vector q (q_d = number of molecules drawn d times)."""

    u: np.ndarray
    s: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.int64)
        s = np.ascontiguousarray(self.s, dtype=np.int64)
        q = np.ascontiguousarray(self.q, dtype=np.int64)
        m, n = s.size, u.size
        if q.size != n + 1 or q.sum() != m or (np.arange(n + 1) * q).sum() != n:
            raise InvalidAmplificationVector(
                f"inconsistent realization: M={m}, N={n}, q={q.tolist()}")
        for a in (u, s, q):
            a.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "q", q)


def realization_from_u(u, num_molecules: int) -> SamplingRealization:
    """Derive (s, q) from an index vector."""
    u = np.asarray(u, dtype=np.int64)
    if u.size and (u.min() < 0 or u.max() >= num_molecules):
        raise InconsistentCandidate(f"indices outside [0, {num_molecules})")
    s = np.bincount(u, minlength=num_molecules)
    q = np.bincount(s, minlength=u.size + 1)
    return SamplingRealization(u=u, s=s, q=q[: u.size + 1])


@dataclass(frozen=True)
class Codebook:
    """words: (count, M, L) integer array over the input alphabet."""

    words: np.ndarray

    def __post_init__(self):
        w = np.ascontiguousarray(self.words, dtype=np.int64)
        if w.ndim != 3 or w.shape[0] < 1:
            raise InvalidDistribution("codebook must be a (count, M, L) array")
        flat = {wd.tobytes() for wd in w}
        if len(flat) != w.shape[0]:
            raise InvalidDistribution("codewords must be distinct")
        w.setflags(write=False)
        object.__setattr__(self, "words", w)

    @property
    def M(self) -> int:
        return self.words.shape[1]

    @property
    def L(self) -> int:
        return self.words.shape[2]

    @property
    def rate(self) -> float:
        return log(self.words.shape[0]) / (self.M * self.L)


def make_codebook(count: int, M: int, L: int, px, seed: int) -> Codebook:
    """Codebook with symbols drawn i.i.d. from px; duplicate words are
    redrawn from the continuing stream so the result is deterministic."""
    px = _probs(px)
    rng = _trial_rng(seed, 0)
    words = rng.choice(px.size, size=(count, M, L), p=px)
    seen = {}
    for j in range(count):
        while words[j].tobytes() in seen:
            words[j] = rng.choice(px.size, size=(M, L), p=px)
        seen[words[j].tobytes()] = j
    return Codebook(words=words)


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Counter-based substream: one Philox stream per (seed, trial)."""
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(trial)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def sample_channel(codeword: np.ndarray, w: Dmc, num_samples: int, rng):
    """Sample num_samples molecules with replacement and sequence each one.

    rng may be a seed or a numpy Generator.  Returns (reads, realization)
    where reads is the (N, L) output array.
    """
    if isinstance(rng, (int, np.integer)):
        rng = _trial_rng(int(rng), 0)
    x = np.asarray(codeword, dtype=np.int64)
    M, L = x.shape
    u = rng.integers(0, M, size=num_samples)
    real = realization_from_u(u, M)
    cum = np.cumsum(w.rows, axis=1)
    draws = rng.random((num_samples, L))
    reads = (draws[:, :, None] > cum[x[u]]).sum(axis=2)
    reads = np.minimum(reads, w.num_outputs - 1)
    return reads.astype(np.int64), real


def type_class_sizes(q) -> tuple:
    """Exact (|T_q|, |T_s|, |T_q2|) for an amplification vector.

    |T_q| = M! / prod q_d!, |T_s| = N! / prod (d!)^{q_d}, and the
    amplification class is their product.
    """
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 1 or q.size == 0 or q.min() < 0:
        raise InvalidAmplificationVector("q must be a nonnegative integer vector")
    M = int(q.sum())
    N = int((np.arange(q.size) * q).sum())
    t_q = factorial(M)
    for qd in q:
        t_q //= factorial(int(qd))
    t_s = factorial(N)
    for d, qd in enumerate(q):
        t_s //= factorial(d) ** int(qd)
    return t_q, t_s, t_q * t_s


def type_class_log_sizes(q) -> tuple:
    """(log|T_q|, log|T_s|, log|T_q2|) via log-factorials; the third is the
    sum of the first two."""
    q = np.asarray(q, dtype=np.int64)
    if q.ndim != 1 or q.size == 0 or q.min() < 0:
        raise InvalidAmplificationVector("q must be a nonnegative integer vector")
    ds = np.arange(q.size)
    M = int(q.sum())
    N = int((ds * q).sum())
    log_tq = lgamma(M + 1) - sum(lgamma(int(qd) + 1) for qd in q)
    log_ts = lgamma(N + 1) - float((q * np.array([lgamma(d + 1) for d in ds])).sum())
    return log_tq, log_ts, log_tq + log_ts


def amplification_vectors(M: int, N: int):
    """All q with sum q = M and sum d q_d = N (partitions of N into at most
    M parts, written as multiplicity counts)."""
    out = []

    def build(remaining_n, max_part, parts):
        if remaining_n == 0:
            if len(parts) <= M:
                q = np.zeros(N + 1, dtype=np.int64)
                for p_ in parts:
                    q[p_] += 1
                q[0] = M - len(parts)
                out.append(q)
            return
        for part in range(min(max_part, remaining_n), 0, -1):
            if len(parts) < M:
                build(remaining_n - part, part, parts + [part])

    build(N, N, [])
    return out


def _empirical_terms(counts: dict, total: int, px: np.ndarray) -> float:
    """D(type_X || px) + I_type(A; B^d) from sparse joint counts."""
    if total == 0:
        return 0.0
    ax: dict = {}
    by: dict = {}
    h_joint = 0.0
    for (a, b), c in counts.items():
        ax[a] = ax.get(a, 0) + c
        by[b] = by.get(b, 0) + c
        h_joint -= c / total * log(c / total)
    h_a = -sum(c / total * log(c / total) for c in ax.values())
    h_b = -sum(c / total * log(c / total) for c in by.values())
    mi = h_a + h_b - h_joint
    div = sum(c / total * log((c / total) / max(px[a], 1e-300)) for a, c in ax.items())
    return div + mi


def universal_metric(codeword: np.ndarray, reads: np.ndarray, u, px) -> float:
    """Penalized empirical-mutual-information score of a candidate index
    vector: -(M - q_0) log M plus, per multiplicity group d, q_d L times
    the input-type divergence plus the empirical mutual information
    between inputs and their d-read super-symbols (reads sorted within a
    super-symbol, the type-merged alphabet)."""
    x = np.asarray(codeword, dtype=np.int64)
    y = np.asarray(reads, dtype=np.int64)
    px = _probs(px)
    M, L = x.shape
    u = np.asarray(u, dtype=np.int64)
    if u.size != y.shape[0]:
        raise InconsistentCandidate(f"candidate has {u.size} indices for {y.shape[0]} reads")
    real = realization_from_u(u, M)
    s = real.s
    positions = [np.nonzero(u == m)[0] for m in range(M)]
    score = -(M - int(real.q[0])) * log(M)
    groups: dict = {}
    for m in range(M):
        groups.setdefault(int(s[m]), []).append(m)
    for d, members in groups.items():
        counts: dict = {}
        total = 0
        for m in members:
            rows = y[positions[m]] if d > 0 else None
            for col in range(L):
                a = int(x[m, col])
                b = tuple(sorted(int(v) for v in rows[:, col])) if d > 0 else ()
                counts[(a, b)] = counts.get((a, b), 0) + 1
                total += 1
        score += total * _empirical_terms(counts, total, px)
    return score


def decode_universal(reads: np.ndarray, codebook: Codebook, px, dbar: int | None = None,
                     enumeration_cap: int = 1_000_000) -> int:
    """Index of the codeword maximizing the universal metric over candidate
    index vectors whose amplification vector has no multiplicity >= dbar
    (dbar None disables the restriction).  Ties break to the lowest index.
    """
    y = np.asarray(reads, dtype=np.int64)
    M, N = codebook.M, y.shape[0]
    if M ** N > enumeration_cap:
        raise EnumerationCapExceeded(f"M^N = {M}^{N} exceeds cap {enumeration_cap}")
    px = _probs(px)
    limit = N + 1 if dbar is None else dbar
    candidates = []
    for flat in range(M ** N):
        u = np.empty(N, dtype=np.int64)
        f = flat
        for n in range(N):
            u[n] = f % M
            f //= M
        s = np.bincount(u, minlength=M)
        if s.max() < limit:
            candidates.append(u)
    if not candidates:
        raise InvalidAmplificationVector(f"dbar={dbar} excludes every index vector")
    best_idx, best_score = 0, -np.inf
    for j in range(codebook.words.shape[0]):
        word = codebook.words[j]
        for u in candidates:
            score = universal_metric(word, y, u, px)
            if score > best_score + 1e-12:
                best_score, best_idx = score, j
    return best_idx


def wilson_interval(successes: int, trials: int, z: float = WILSON_Z) -> tuple:
    """95% Wilson score interval for a binomial proportion."""
    if trials <= 0:
        raise InvalidDistribution("trials must be positive")
    phat = successes / trials
    denom = 1.0 + z * z / trials
    center = (phat + z * z / (2 * trials)) / denom
    half = z * np.sqrt(phat * (1 - phat) / trials + z * z / (4 * trials * trials)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


def monte_carlo_error(codebook: Codebook, w: Dmc, num_samples: int, trials: int,
                      seed: int, px, dbar: int | None = None,
                      enumeration_cap: int = 1_000_000):
    """Monte Carlo decoding-error estimate with a Wilson 95% interval.

    Each trial draws a codeword index, runs the channel, and decodes; all
    randomness comes from per-trial counter-based substreams of the given
    seed, so estimates are bit-identical across runs and independent of
    any parallel trial ordering.  Decoder outputs are memoized per distinct
    read pattern (the decoder is deterministic).
    """
    px = _probs(px)
    n_words = codebook.words.shape[0]
    cache: dict = {}
    errors = 0
    for trial in range(trials):
        rng = _trial_rng(seed, trial + 1)
        j = int(rng.integers(0, n_words))
        y, _ = sample_channel(codebook.words[j], w, num_samples, rng)
        key = y.tobytes()
        if key not in cache:
            cache[key] = decode_universal(y, codebook, px, dbar=dbar,
                                          enumeration_cap=enumeration_cap)
        if cache[key] != j:
            errors += 1
    rate = errors / trials
    return rate, wilson_interval(errors, trials)


def outage_probability(R: float, px, w: Dmc, alpha: float, beta: float, M: int,
                       trials: int, seed: int) -> float:
    """Fraction of sampled amplification states whose supported rate falls
    below R.  The supported rate is the per-molecule average of
    I(px, W^(+s_m)) - (1/beta) 1{s_m >= 1} under the realized duplicate
    counts, so a lookup table of per-order mutual informations suffices.
    """
    from .channel import binomial_extend
    from .infotheory import mutual_information

    px = _probs(px)
    N = int(round(alpha * M))
    mi_table = [0.0]

    def mi_up_to(dmax):
        while len(mi_table) <= dmax:
            mi_table.append(mutual_information(px, binomial_extend(w, len(mi_table))))

    hits = 0
    for trial in range(trials):
        rng = _trial_rng(seed, trial + 1)
        s = rng.multinomial(N, np.full(M, 1.0 / M))
        mi_up_to(int(s.max()))
        table = np.array(mi_table)
        gamma = float(table[s].sum() - (s > 0).sum() / beta) / M
        if gamma < R:
            hits += 1
    return hits / trials
