"""LDPC convolutional codes from graph covers of LDPC block codes."""
from .gf2 import (
    DegreeProfile,
    ParallelEdgeWarning,
    PolyMatrix,
    SparseBinMatrix,
    degree_profile,
    expand_poly,
    gf2_nullspace,
    gf2_rank,
    is_in_nullspace,
    read_alist,
    write_alist,
)
from .cover import (
    CirculantShift,
    CoverSpec,
    Explicit,
    Identity,
    ToeplitzShift,
    gcc1,
    gcc2,
    kron_perm,
    per_entry_decomposition,
    validate_cover,
)
from .convcode import (
    ConvCode,
    encode,
    from_tanner_poly,
    is_valid_stream,
    materialize_window,
    params_report,
    reblock,
    unblock,
)
from .unwrap import (
    CutParams,
    Decomposition,
    jfz_diagonal_cut,
    jfz_random_cut,
    jfz_unwrap,
    pad_for_cut,
    reduce_memory,
    tanner_unwrap,
    tanner_wrap,
)

__version__ = "0.1.0"
