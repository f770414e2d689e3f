"""Measures evaluated natively rather than through the DSL.

These sum ``p * log(p / q)`` terms over the four cells of the table or take
maxima over partitions, and use the convention ``0 * log 0 = 0``.  Every
function takes the four cell arrays and returns an array of the same shape,
with NaN for undefined values.
"""

from __future__ import annotations

import numpy as np


def _plogpq(p, q):
    # p*log(p/q) with 0*log(0/q) := 0; q == 0 with p > 0 cannot happen for marginals
    with np.errstate(all="ignore"):
        out = p * np.log(p / q)
    return np.where(p == 0, 0.0, out)


def _probs(f11, f10, f01, f00):
    n = f11 + f10 + f01 + f00
    p11, p10, p01, p00 = f11 / n, f10 / n, f01 / n, f00 / n
    pa, pb = p11 + p10, p11 + p01
    return p11, p10, p01, p00, pa, 1.0 - pa, pb, 1.0 - pb


def mutual_information(f11, f10, f01, f00):
    p11, p10, p01, p00, pa, pna, pb, pnb = _probs(f11, f10, f01, f00)
    return _plogpq(p11, pa * pb) + _plogpq(p10, pa * pnb) + _plogpq(p01, pna * pb) + _plogpq(p00, pna * pnb)


def _entropy(p, q):
    return -(_plogpq(p, 1.0) + _plogpq(q, 1.0))


def normalized_mutual_information(f11, f10, f01, f00):
    """MI divided by the smaller of the two marginal entropies."""
    _, _, _, _, pa, pna, pb, pnb = _probs(f11, f10, f01, f00)
    h = np.minimum(_entropy(pa, pna), _entropy(pb, pnb))
    with np.errstate(all="ignore"):
        return mutual_information(f11, f10, f01, f00) / h


def j_measure(f11, f10, f01, f00):
    p11, p10, _, _, pa, _, pb, pnb = _probs(f11, f10, f01, f00)
    return _plogpq(p11, pa * pb) + _plogpq(p10, pa * pnb)


def gini_index(f11, f10, f01, f00):
    p11, p10, p01, p00, pa, pna, pb, pnb = _probs(f11, f10, f01, f00)
    with np.errstate(all="ignore"):
        return (p11**2 + p10**2) / pa + (p01**2 + p00**2) / pna - pb**2 - pnb**2


def goodman_kruskal(f11, f10, f01, f00):
    """Goodman-Kruskal lambda, symmetrised over rows and columns."""
    n = f11 + f10 + f01 + f00
    rows = np.maximum(f11, f10) + np.maximum(f01, f00)
    cols = np.maximum(f11, f01) + np.maximum(f10, f00)
    ma = np.maximum(f11 + f10, f01 + f00)
    mb = np.maximum(f11 + f01, f10 + f00)
    with np.errstate(all="ignore"):
        return (rows + cols - ma - mb) / (2.0 * n - ma - mb)


def _pmi_weighted(weight, p11, pa, pb):
    # weight * log(p11 / (pa pb)), zero where p11 == 0 and the weight vanishes with it
    with np.errstate(all="ignore"):
        out = weight * np.log(p11 / (pa * pb))
    return np.where((p11 == 0) & (weight == 0), 0.0, out)


def one_way_support(f11, f10, f01, f00):
    """P(B|A) log(P(AB) / (P(A)P(B)))."""
    p11, _, _, _, pa, _, pb, _ = _probs(f11, f10, f01, f00)
    with np.errstate(all="ignore"):
        return _pmi_weighted(p11 / pa, p11, pa, pb)


def two_way_support(f11, f10, f01, f00):
    """P(AB) log(P(AB) / (P(A)P(B)))."""
    p11, _, _, _, pa, _, pb, _ = _probs(f11, f10, f01, f00)
    return _pmi_weighted(p11, p11, pa, pb)


# keyed by catalog id
NATIVES = {
    "one-way-support": one_way_support,
    "two-way-support": two_way_support,
    "j-measure": j_measure,
    "gini-index": gini_index,
    "goodman-kruskal": goodman_kruskal,
    "mutual-information": mutual_information,
    "normalized-mutual-information": normalized_mutual_information,
}
