"""Shared synthetic data generators for the model tests."""
import numpy as np

from proxlink.logit import sigmoid

# intercept, ln_geo, ln_tenb, interaction, cog_distance
TRUE_LOGIT_BETA = np.array([-0.5, -0.4, 4.0, 0.4, -2.5])
LOGIT_FEATURES = ["ln_geo", "ln_tenb", "interaction", "cog_distance"]


def synth_logit_data(n=10_000, seed=0, beta=TRUE_LOGIT_BETA):
    """Pairs drawn from the logit link with the pair-feature geometry:
    a co-located mass near zero distance, log-normal long distances,
    frequently-zero network proximity, and spread-out cognitive distance."""
    rng = np.random.default_rng(seed)
    co_located = rng.uniform(size=n) < 0.25
    d = np.where(co_located, rng.exponential(1.5, n), np.exp(rng.normal(5.0, 1.5, n)))
    ln_geo = np.log1p(d)
    tenb = np.where(rng.uniform(size=n) < 0.5, 0.0, rng.exponential(1.5, n))
    ln_tenb = np.log1p(tenb)
    cog = rng.beta(0.6, 0.6, n) * 2
    X = np.column_stack([ln_geo, ln_tenb, ln_geo * ln_tenb, cog])
    eta = beta[0] + X @ beta[1:]
    y = (rng.uniform(size=n) < sigmoid(eta)).astype(float)
    return X, y


def separable_dataset(n=2000, seed=0, margin=0.5):
    """Linearly separable 7-feature rows mimicking the pair-feature schema."""
    rng = np.random.default_rng(seed)
    rows, labels = [], []
    w = np.array([-0.8, 2.0, 0.3, -1.5, -0.4, -0.6, -0.5])
    b = 1.0
    while len(rows) < n:
        ln_geo = rng.uniform(0, 10)
        ln_tenb = rng.uniform(0, 2.5)
        x = np.array([ln_geo, ln_tenb, ln_geo * ln_tenb, rng.uniform(0, 2),
                      rng.integers(0, 2), rng.integers(0, 2), rng.integers(0, 2)],
                     dtype=float)
        score = w @ x + b
        if abs(score) < margin:
            continue
        rows.append(x)
        labels.append(1 if score > 0 else 0)
    return np.array(rows), np.array(labels)
