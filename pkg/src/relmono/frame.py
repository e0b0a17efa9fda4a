"""The :class:`Frame` value carried along paths by the transport engine."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class Frame:
    """Period data (and optionally a logarithm) at a point of the base.

    ``state`` has one row ``(w_a, dw_a/dm, w_b, dw_b/dm)`` per factor. The
    ``2g x g`` period stack has rows ``w_a e_k`` and ``w_b e_k``: factor ``k``
    contributes its pair in its own coordinate. ``aux`` holds the cover
    variables at ``at`` (continued, so they pin down the sheet).
    """

    state: np.ndarray
    at: complex
    sheet: int = 0
    aux: tuple = ()
    log: Optional[np.ndarray] = None

    @property
    def g(self) -> int:
        return self.state.shape[0]

    @property
    def periods(self) -> np.ndarray:
        g = self.g
        out = np.zeros((2 * g, g), dtype=complex)
        for k in range(g):
            out[2 * k, k] = self.state[k, 0]
            out[2 * k + 1, k] = self.state[k, 2]
        return out

    def pair(self, k: int):
        return complex(self.state[k, 0]), complex(self.state[k, 2])

    def with_(self, **changes) -> "Frame":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        out = {
            "at": [self.at.real, self.at.imag],
            "sheet": self.sheet,
            "periods": [[[complex(w).real, complex(w).imag] for w in self.pair(k)] for k in range(self.g)],
        }
        if self.log is not None:
            out["log"] = [[complex(v).real, complex(v).imag] for v in self.log]
        return out
