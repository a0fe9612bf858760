"""Synthetic sparse multiclass data shaped like a small text-categorisation set.

Classes are grouped; every group and every class owns a sparse support of
features with a Gaussian centroid.  A sample keeps a random subset of its
class and group supports, perturbs the centroid values with Gaussian noise,
adds a few background features, and is L2-normalised.  Classes in the same
group share most of their mass, which keeps coarse class splits hard for
linear learners while one-vs-rest style splits stay easy.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import Dataset


@dataclass(frozen=True)
class SyntheticSpec:
    K: int = 105
    d: int = 20000
    n_groups: int = 15
    class_support: int = 30
    group_support: int = 60
    keep: float = 0.25
    noise: float = 1.0
    background: int = 40
    background_scale: float = 0.5
    group_weight: float = 2.0


def _supports(spec: SyntheticSpec, rng: np.random.Generator):
    group_of = np.arange(spec.K) % spec.n_groups
    class_sets = [rng.choice(spec.d, spec.class_support, replace=False) for _ in range(spec.K)]
    group_sets = [rng.choice(spec.d, spec.group_support, replace=False)
                  for _ in range(spec.n_groups)]
    class_mu = [np.abs(rng.normal(1.0, 0.5, spec.class_support)) for _ in range(spec.K)]
    group_mu = [spec.group_weight * np.abs(rng.normal(1.0, 0.5, spec.group_support))
                for _ in range(spec.n_groups)]
    return group_of, class_sets, group_sets, class_mu, group_mu


def make_dataset(m: int, spec: SyntheticSpec = SyntheticSpec(), seed: int = 0,
                 sample_seed: int | None = None) -> Dataset:
    """Draw ``m`` samples.

    ``seed`` fixes the class structure; ``sample_seed`` the draws, so train
    and test sets share structure by passing the same ``seed``.
    """
    structure = _supports(spec, np.random.default_rng(seed))
    group_of, class_sets, group_sets, class_mu, group_mu = structure
    rng = np.random.default_rng(seed + 1 if sample_seed is None else sample_seed)
    y = rng.integers(0, spec.K, size=m)
    # Background words follow a Zipf-like frequency profile over the vocabulary.
    background_cdf = np.cumsum(1.0 / (np.arange(spec.d) + 10.0))
    background_cdf /= background_cdf[-1]

    indptr = [0]
    indices, values = [], []
    for k in y:
        g = group_of[k]
        feats = np.concatenate([class_sets[k], group_sets[g]])
        mu = np.concatenate([class_mu[k], group_mu[g]])
        keep = rng.random(len(feats)) < spec.keep
        if not keep.any():
            keep[rng.integers(len(feats))] = True
        feats, mu = feats[keep], mu[keep]
        vals = mu + spec.noise * rng.normal(size=len(mu))
        bg = np.unique(np.searchsorted(background_cdf, rng.random(spec.background), side="right"))
        bg = np.minimum(bg, spec.d - 1)
        bg_vals = spec.background_scale * np.abs(rng.normal(size=len(bg)))
        acc: dict[int, float] = {}
        for j, v in zip(np.concatenate([feats, bg]).tolist(),
                        np.concatenate([vals, bg_vals]).tolist()):
            acc[j] = acc.get(j, 0.0) + v
        idx = np.array(sorted(j for j, v in acc.items() if v != 0.0), dtype=np.int64)
        val = np.array([acc[j] for j in idx.tolist()])
        val /= np.linalg.norm(val)
        indices.append(idx)
        values.append(val)
        indptr.append(indptr[-1] + len(idx))

    labels = tuple(str(k + 1) for k in range(spec.K))
    return Dataset(np.asarray(indptr, dtype=np.int64), np.concatenate(indices),
                   np.concatenate(values), y.astype(np.int64), spec.d, labels)


def make_train_test(m_train: int = 6000, m_test: int = 3000,
                    spec: SyntheticSpec = SyntheticSpec(), seed: int = 0):
    train = make_dataset(m_train, spec, seed, sample_seed=seed + 1)
    test = make_dataset(m_test, spec, seed, sample_seed=seed + 2)
    return train, test
