from .exception import InertialException
from .game import Affine, Constant, PopulationGame, RideHailing, SimplexPoint, SwitchingCosts, evaluate_utilities, \
    extend_with_exit, lipschitz_bounds, validate_game
from .equilibrium import envy_sets, is_inertial, is_nash, jacobian_fd, monotonicity_probe, operator_f, vi_gap
from .solver import BetterResponseConfig, EqualShare, FixedAmount, PerTarget, ProjectionConfig, UtilityWeighted, \
    better_response_solve, better_response_step, check_transfer_bounds, potential_value, project_simplex, \
    projection_solve
from .multiclass import MultiClassGame, StackedPoint, better_response_multi_solve, is_multiclass_inertial, \
    operator_f_multi, reduce
from .scenario import CityGraph, build_ridehailing, random_game, random_simplex_point, recommended_params
from .params import DEFAULTS

VERSION = "0.1.0"
__version__ = VERSION

__all__ = ["InertialException", "DEFAULTS",
           "Affine", "Constant", "RideHailing", "PopulationGame", "SimplexPoint", "SwitchingCosts",
           "validate_game", "evaluate_utilities", "lipschitz_bounds", "extend_with_exit",
           "envy_sets", "is_inertial", "is_nash", "operator_f", "vi_gap", "jacobian_fd", "monotonicity_probe",
           "ProjectionConfig", "BetterResponseConfig", "EqualShare", "PerTarget", "UtilityWeighted", "FixedAmount",
           "project_simplex", "projection_solve", "better_response_step", "better_response_solve",
           "check_transfer_bounds", "potential_value",
           "MultiClassGame", "StackedPoint", "reduce", "operator_f_multi", "is_multiclass_inertial",
           "better_response_multi_solve",
           "CityGraph", "build_ridehailing", "recommended_params", "random_game", "random_simplex_point"]
