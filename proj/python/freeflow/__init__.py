from ._core import (
    Field,
    FreeflowError,
    Function,
    __version__,
    contains_halfplane_translate,
    fal2_check,
    recover_parameters,
    run_cli,
    semigroup_density,
    slit_image,
)

__all__ = [
    "Field",
    "FreeflowError",
    "Function",
    "__version__",
    "contains_halfplane_translate",
    "fal2_check",
    "recover_parameters",
    "run_cli",
    "semigroup_density",
    "slit_image",
]
