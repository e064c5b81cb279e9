"""Synthetic series and static reference data."""

from __future__ import annotations

import numpy as np

from .series import SplitSpec, TimeSeries

# one period sampled at 51 points; samples 0..25 are the non-negative half
SINUSOID_SAMPLES = 51
SINUSOID_SPLIT = SplitSpec(valid_fraction=25 / 51, train_eval_ratio=(6.0, 4.0))


def sinusoid(n: int = SINUSOID_SAMPLES) -> TimeSeries:
    """A single sine period, endpoints included: ``sin(2 pi k / (n - 1))``."""
    t = np.linspace(0.0, 2.0 * np.pi, n)
    return TimeSeries(np.sin(t), name="sinusoid")


# Average SMAPE (%) of the 27 ranked NN5 competition entries, best first.
NN5_REFERENCE = [
    (19.9, "Wildi"),
    (20.4, "Andrawis"),
    (20.5, "Vogel"),
    (20.6, "D'yakonov"),
    (21.1, "Noncheva"),
    (21.7, "Rauch"),
    (21.8, "Luna"),
    (21.9, "Lagoo"),
    (22.1, "Wichard"),
    (22.3, "Gao"),
    (23.7, "Puma-Villanueva"),
    (24.1, "Autobox(Reilly)"),
    (24.5, "Lewicke"),
    (24.8, "Brentnall"),
    (25.3, "Dang"),
    (25.3, "Pasero"),
    (25.3, "Adeodato"),
    (26.8, "not published"),
    (27.3, "not published"),
    (28.1, "Tung"),
    (28.8, "Naive Seasonal"),
    (33.1, "not published"),
    (36.3, "not published"),
    (41.3, "not published"),
    (45.4, "not published"),
    (48.4, "naive Level"),
    (53.5, "not published"),
]
NN5_PMBSI_REFERENCE = 38.8
NN5_HORIZON = 56
NN5_LENGTH = 775


def nn5_rank(mean_smape: float) -> int:
    """1-based position ``mean_smape`` would take among the reference entries."""
    return 1 + sum(ref < mean_smape for ref, _ in NN5_REFERENCE)
