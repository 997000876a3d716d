"""End-of-row detection: row-sum argmax in a shifted band plus smoothing.

The scan band for ordinal n covers rows [(n-1)*h, n*h), i.e. band 1 is
the top of the image. Callers track the anchor band ordinal: when the
anchor scan sits in its n-th shifted band, the end boundary lives inside
that same band, which has ordinal n+1 here. Scanning band 3 is what lets
the filtered estimate reach the [2h, 3h) trigger range.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from rowtrack import _kernels
from rowtrack.mask import Mask


@dataclass(frozen=True)
class EorState:
    beta: float = 0.8
    filtered_y: float | None = None
    triggered: bool = False
    last_n: int = 0

    def __post_init__(self):
        if not 0.0 <= self.beta < 1.0:
            raise ValueError("beta must be in [0, 1)")


def eor_scan(mask: Mask, n: int, h: int) -> int | None:
    """Row with the largest full-width pixel sum in band [(n-1)*h, n*h).

    Returns None when the band is entirely empty. Ties break toward the
    smallest row index. n must be >= 1.
    """
    if n < 1:
        raise ValueError("band ordinal n must be >= 1")
    if h < 1:
        raise ValueError("band height h must be >= 1")
    y0 = (n - 1) * h
    y1 = min(n * h, mask.height)
    if y0 >= mask.height:
        return None
    sums = _kernels.row_sums(mask.pixels, y0, y1)
    i = int(sums.argmax())
    if int(sums[i]) == 0:
        return None
    return y0 + i


def update(state: EorState, measurement: float, h: int, n: int | None = None) -> EorState:
    """Blend a new end-of-row measurement into the filtered estimate.

    The first measurement seeds the filter; afterwards
    filtered <- beta * filtered + (1 - beta) * measurement. The trigger
    latches once the filtered value enters [2h, 3h) and stays latched
    until the caller resets the state.
    """
    if state.filtered_y is None:
        fy = float(measurement)
    else:
        fy = state.beta * state.filtered_y + (1.0 - state.beta) * float(measurement)
    trig = state.triggered or (2 * h <= fy < 3 * h)
    return replace(
        state,
        filtered_y=fy,
        triggered=trig,
        last_n=state.last_n if n is None else n,
    )


def reset(state: EorState) -> EorState:
    """Fresh state for a new row, keeping the filter coefficient."""
    return EorState(beta=state.beta)
