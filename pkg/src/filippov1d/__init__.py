"""Uniqueness analysis and exact solutions for scalar ODEs dX/dt = b(X)
with discontinuous b, in the sense of Filippov."""
from .dsl import parse_expr, parse_field, render
from .envelope import Envelope, ZeroSet, envelope, is_continuity_point, zero_set
from .field import Field, FieldError, NotPointwiseDefined, build_field, value_ae
from .measure import FatCantorUnion, MeasureOracle, built_in_fat_cantor_union, register_oracle
from .oracle import Funnel, euler_selection, reachable_funnel, validate_trajectory
from .solver import (
    SelectedField,
    Trajectory,
    classical_select,
    solve_classical,
    solve_filippov,
    time_of_flight,
    witnesses_condition_A,
    witnesses_condition_B,
)
from .uniqueness import (
    build_g,
    check_condition_A,
    check_condition_B,
    osgood_classify,
    uniqueness_verdict,
)

__all__ = [
    "parse_expr", "parse_field", "render", "Envelope", "ZeroSet", "envelope",
    "is_continuity_point", "zero_set", "Field", "FieldError", "NotPointwiseDefined",
    "build_field", "value_ae", "FatCantorUnion", "MeasureOracle", "built_in_fat_cantor_union",
    "register_oracle", "Funnel", "euler_selection", "reachable_funnel", "validate_trajectory",
    "SelectedField", "Trajectory", "classical_select", "solve_classical", "solve_filippov",
    "time_of_flight", "witnesses_condition_A", "witnesses_condition_B", "build_g",
    "check_condition_A", "check_condition_B", "osgood_classify", "uniqueness_verdict",
]
