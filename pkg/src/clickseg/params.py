"""Pipeline parameters with the empirically-set defaults."""

from __future__ import annotations

from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Params:
    """Weights of the two energy stages plus segmentation settings.

    alpha1 scales stage-1 unaries, alpha2 stage-2 unaries; beta1 is the
    bandwidth of the appearance kernel exp(-beta1 * chi2); u_s is the floor
    probability of unclicked superpixels; t_window is the temporal half
    window (2T+1 frames total); gamma1/gamma2 are the agree/disagree costs
    of the stage-2 unary; click_delay shifts clicks back to compensate for
    reaction time.
    """

    alpha1: float = 0.25
    alpha2: float = 0.2
    beta1: float = 5.0
    u_s: float = 0.4
    t_window: int = 2
    gamma1: float = 0.1
    gamma2: float = 0.9
    click_delay: int = 2
    proximity_threshold: float = 0.5
    slic_target: int | None = None  # None -> pixel_count // 40
    slic_compactness: float = 10.0
    histogram_bins: int = 8
    prob_epsilon: float = 1e-6

    def __post_init__(self):
        if self.alpha1 <= 0 or self.alpha2 <= 0 or self.beta1 <= 0:
            raise ValueError("alpha1, alpha2 and beta1 must be positive")
        if not 0.0 <= self.u_s < 1.0:
            raise ValueError("u_s must lie in [0, 1)")
        if self.gamma1 >= self.gamma2:
            raise ValueError("gamma1 must be smaller than gamma2")
        if self.click_delay < 0:
            raise ValueError("click_delay must be >= 0")
        if self.t_window < 0:
            raise ValueError("t_window must be >= 0")
        if self.histogram_bins < 1:
            raise ValueError("histogram_bins must be >= 1")
        if self.slic_compactness <= 0:
            raise ValueError("slic_compactness must be > 0")

    def with_overrides(self, **kwargs) -> "Params":
        return replace(self, **kwargs)

    def slic_target_for(self, width: int, height: int) -> int:
        if self.slic_target is not None:
            return self.slic_target
        return max(1, (width * height) // 40)
