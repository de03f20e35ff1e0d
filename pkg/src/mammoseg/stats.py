"""Pairwise model comparison: exact Wilcoxon signed-rank with Bonferroni.

Fold counts are tiny (five per model), so the test enumerates the exact
null distribution of the signed rank sum instead of using the large-sample
normal approximation.  With five paired folds the smallest achievable
two-sided p is 2/2^5 = 0.0625; a LowPowerWarning makes that structural
limit visible wherever it applies.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

ZERO_POLICIES = ("wilcox-drop", "pratt")
EXACT_LIMIT = 25


class LowPowerWarning(UserWarning):
    """Paired-sample count too small for any comparison to reach p < 0.05."""


@dataclass
class WilcoxonResult:
    statistic: float   # W = min(positive, negative rank sum)
    pvalue: float      # exact two-sided
    n_effective: int   # pairs contributing after zero handling
    degenerate: bool   # all differences were zero

    def __iter__(self):  # allows  W, p = wilcoxon_signed_rank(...)
        return iter((self.statistic, self.pvalue))


def _exact_two_sided_p(ranks2, w_plus2):
    """P(|2*W+ - T| >= |2*w_obs - T|) over all 2^n sign assignments.

    ranks2: doubled ranks (midranks doubled to make them integers).
    w_plus2: doubled observed positive rank sum.
    Exact integer dynamic program over the achievable rank-sum grid.
    """
    total = int(ranks2.sum())
    dist = np.zeros(total + 1, dtype=np.float64)
    dist[0] = 1.0
    for r in ranks2:
        r = int(r)
        shifted = np.zeros_like(dist)
        shifted[r:] = dist[:total + 1 - r]
        dist += shifted
    sums2 = 2 * np.arange(total + 1) - total
    obs = abs(2 * int(w_plus2) - total)
    count = dist[np.abs(sums2) >= obs].sum()
    return min(1.0, count / 2.0 ** len(ranks2))


def wilcoxon_signed_rank(x, y, zero_policy="wilcox-drop"):
    """Exact two-sided Wilcoxon signed-rank test on paired observations.

    Ties in |differences| get midranks.  Zero differences are removed under
    'wilcox-drop' (reducing n) or ranked-then-discarded under 'pratt'.
    Returns a WilcoxonResult; all-zero differences are degenerate (p = 1).
    """
    if zero_policy not in ZERO_POLICIES:
        raise ValueError(f"zero_policy must be one of {ZERO_POLICIES}")
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError(f"paired samples must be equal-length 1-D, got {x.shape} and {y.shape}")
    if x.size < 1:
        raise ValueError("need at least one pair")
    d = x - y
    nonzero = d != 0
    if not nonzero.any():
        return WilcoxonResult(statistic=0.0, pvalue=1.0, n_effective=0, degenerate=True)

    if zero_policy == "wilcox-drop":
        d_used = d[nonzero]
        ranks = rankdata(np.abs(d_used))
    else:  # pratt: rank zeros too, then drop their ranks from both sums
        ranks_all = rankdata(np.abs(d))
        d_used = d[nonzero]
        ranks = ranks_all[nonzero]
    n_eff = d_used.size

    w_plus = float(ranks[d_used > 0].sum())
    w_minus = float(ranks[d_used < 0].sum())
    statistic = min(w_plus, w_minus)

    ranks2 = np.rint(2.0 * ranks).astype(np.int64)
    if n_eff <= EXACT_LIMIT:
        pvalue = _exact_two_sided_p(ranks2, np.rint(2.0 * w_plus).astype(np.int64))
    else:
        # large-sample fallback; never reached for fold-level comparisons
        mu = ranks.sum() / 2.0
        sigma2 = float((ranks ** 2).sum()) / 4.0
        z = (w_plus - mu) / np.sqrt(sigma2)
        from scipy.stats import norm

        pvalue = float(min(1.0, 2.0 * norm.sf(abs(z))))
    return WilcoxonResult(statistic=statistic, pvalue=pvalue, n_effective=n_eff, degenerate=False)


def bonferroni(raw_p, n_comparisons):
    """min(1, p * n_comparisons) per p-value."""
    if n_comparisons < 1:
        raise ValueError("n_comparisons must be positive")
    out = []
    for p in raw_p:
        if not 0.0 <= p <= 1.0:
            raise ValueError(f"p-value outside [0,1]: {p}")
        out.append(min(1.0, p * n_comparisons))
    return out


@dataclass
class StatMatrix:
    model_names: list
    raw_p: np.ndarray       # (m, m) symmetric, nan diagonal
    adjusted_p: np.ndarray  # Bonferroni-adjusted, same shape
    n_comparisons: int

    def long_rows(self):
        rows = []
        m = len(self.model_names)
        for i in range(m):
            for j in range(i + 1, m):
                rows.append(
                    (self.model_names[i], self.model_names[j],
                     float(self.raw_p[i, j]), float(self.adjusted_p[i, j]))
                )
        return rows

    def to_csv(self, path, config_hash=None):
        with open(path, "w", newline="") as fh:
            if config_hash is not None:
                fh.write(f"# config_hash={config_hash}\n")
            fh.write("model_a,model_b,raw_p,adjusted_p\n")
            for a, b, raw, adj in self.long_rows():
                fh.write(f"{a},{b},{raw:.10g},{adj:.10g}\n")


def pairwise_compare(cv_results, zero_policy="wilcox-drop"):
    """Pairwise exact Wilcoxon over per-fold best Dice, Bonferroni-adjusted.

    All CVResults must share the fold structure (same k, same split seed)
    for the pairing to be valid.
    """
    if not cv_results:
        raise ValueError("need at least one CV result")
    names = [r.model_name for r in cv_results]
    vectors = []
    k0 = None
    for r in cv_results:
        folds = sorted(r.fold_results, key=lambda f: f.fold_index)
        if k0 is None:
            k0 = len(folds)
        elif len(folds) != k0:
            raise ValueError(
                f"mismatched fold structure: {r.model_name} has {len(folds)} folds, expected {k0}"
            )
        vectors.append(np.array([f.best_dice for f in folds], dtype=np.float64))

    m = len(names)
    n_comparisons = m * (m - 1) // 2
    raw = np.full((m, m), np.nan)
    min_n_eff = None
    for i in range(m):
        for j in range(i + 1, m):
            res = wilcoxon_signed_rank(vectors[i], vectors[j], zero_policy=zero_policy)
            raw[i, j] = raw[j, i] = res.pvalue
            n_eff = res.n_effective
            min_n_eff = n_eff if min_n_eff is None else min(min_n_eff, n_eff)
    if min_n_eff is not None and min_n_eff <= 5:
        warnings.warn(
            f"effective paired-sample count {min_n_eff} <= 5: the exact two-sided "
            "Wilcoxon test cannot reach p < 0.05 at this size",
            LowPowerWarning,
            stacklevel=2,
        )
    adjusted = np.minimum(1.0, raw * max(1, n_comparisons))
    return StatMatrix(model_names=names, raw_p=raw, adjusted_p=adjusted, n_comparisons=n_comparisons)
