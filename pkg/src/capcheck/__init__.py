"""capcheck: a typechecker and box-inference engine for a capture calculus.

The package has three engines over one syntax:

* `checker.typecheck` accepts exactly the box-explicit programs,
* `adapt_term.infer` elaborates box-incomplete programs by inserting
  box/unbox coercions (with eta-expansion where the shapes demand it),
* `adapt_type.infer_t` predicts the elaborated type and capture set
  without ever building the elaborated term.

`harness.run_differential` cross-validates the three against each other
and against a small F-sub backend obtained by erasing boxes.
"""

from .adapt_term import adapt_sub, box_adapt, infer, unbox_var
from .adapt_type import (
    AdaptResult,
    adapt_sub_t,
    box_adapt_t,
    fill_hole,
    infer_t,
    unbox_var_t,
)
from .checker import avoid, typecheck
from .errors import (
    AdaptFailure,
    CheckError,
    EscapeViolation,
    FuelExhausted,
    GenerationExhausted,
    IllFormedType,
    MNFViolation,
    NotABoxed,
    NotAFunction,
    NotATypeFunction,
    ParseError,
    SubcaptureFailure,
    SubtypeFailure,
    UnboundVariable,
)
from .fsub import (
    FAbs,
    FAll,
    FApp,
    FArrow,
    FEnv,
    FLet,
    FTAbs,
    FTApp,
    FTVar,
    FTop,
    FVar,
    erase,
    erase_env,
    erase_type,
    f_alpha_eq,
    fsub_subtype,
    fsub_typecheck,
    show_fterm,
    show_ftype,
    subst_ftype,
)
from .harness import (
    PROPERTIES,
    Failure,
    GenConfig,
    Report,
    broken_cv,
    case_seed,
    drop_boxes,
    gen_welltyped,
    hostile_pair,
    run_differential,
    shrink_case,
)
from .normalize import compact_let, normalize
from .subcapture import subcapture
from .subtyping import (
    DEFAULT_FUEL,
    Fuel,
    subtype,
    subtype_capt,
    var_type,
    widen_tvar,
    widen_var,
)
from .syntax import (
    Abs,
    App,
    Boxed,
    BoxV,
    Capturing,
    CaptureSet,
    EMPTY,
    Env,
    Fun,
    HoledCaptureSet,
    Kind,
    Let,
    NameSupply,
    ROOT,
    Shape,
    ShapeType,
    TAbs,
    TApp,
    TFun,
    TOP,
    TVar,
    TVarRef,
    Term,
    TermBind,
    Top,
    Type,
    TypeBind,
    Unbox,
    Var,
    VarRef,
    alpha_eq,
    cs,
    cv,
    fv,
    fv_type,
    is_simple_formed,
    kind_of,
    parse_capture_set,
    parse_env,
    parse_term,
    parse_type,
    show,
    subst,
    wf_env,
    wf_type,
)

__all__ = [n for n in dir() if not n.startswith("_")]
__version__ = "0.1.0"
