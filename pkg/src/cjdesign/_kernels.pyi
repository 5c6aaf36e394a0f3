import numpy as np
import numpy.typing as npt

_F = npt.NDArray[np.float64]

def diff_matvec(v: _F, n: int) -> _F: ...
def diff_rmatvec(x: _F, n: int) -> _F: ...
def diff_column(k: int, n: int) -> _F: ...
def mgs_sweep(Q: _F, d: int, v: _F, h: _F) -> None: ...
def weighted_row_sumsq(Z: _F, w: _F) -> _F: ...
def pair_variances(C: _F) -> _F: ...
def fill_delta(C: _F) -> _F: ...
