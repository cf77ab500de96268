from ._core import (
    Factor,
    Matrix,
    NotSpdError,
    SelectedInverseResult,
    TileinvError,
    __version__,
    dag_report,
    export_dot,
    factorize,
    from_dense,
    generate,
    predict_gemm_count,
    read_matrix_market,
    selected_inverse,
    selected_inverse_of_factor,
    write_matrix_market,
)

__all__ = [
    "Factor",
    "Matrix",
    "NotSpdError",
    "SelectedInverseResult",
    "TileinvError",
    "__version__",
    "dag_report",
    "export_dot",
    "factorize",
    "from_dense",
    "generate",
    "predict_gemm_count",
    "read_matrix_market",
    "selected_inverse",
    "selected_inverse_of_factor",
    "write_matrix_market",
]
