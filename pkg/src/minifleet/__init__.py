"""minifleet: a deterministic software twin of a desk-scale multi-vehicle
platform -- differential-drive simulation, pure-pursuit tracking, hex-grid
min-max planning, reciprocal collision avoidance, and the fleet wire
protocols, driven end-to-end by a scenario orchestrator."""

__version__ = "0.1.0"

from .vehicle import (  # noqa: F401
    DEFAULT_PARAMS,
    DubinsControl,
    Pose2D,
    Twist2D,
    VehicleParams,
    WheelThrust,
    constant_thrust_closed_form,
    ddr_derivative,
    dubins_to_thrust,
    integrate,
    twist_to_thrust,
    wrap_angle,
)
from .paths import TimedPath, Waypoint, timestamp_polyline  # noqa: F401
from .pursuit import (  # noqa: F401
    FollowState,
    PursuitConfig,
    curvature_to_thrust,
    follow_step,
    lookahead_point,
    pursuit_curvature,
    sync_scale,
)
from .hexgrid import HexGrid, build_hex_grid, snap_to_grid  # noqa: F401
from .planner import (  # noqa: F401
    JointPlan,
    MultiRobotProblem,
    brute_force_plan,
    plan_min_max_dist,
    plan_to_timed_paths,
    validate_plan,
)
from .rvo import (  # noqa: F401
    AgentState,
    HalfPlane,
    orca_halfplanes,
    rvo_step,
    solve_velocity,
    velocities_to_timed_paths,
)
from .world import SensorModel, World  # noqa: F401
from .wire import (  # noqa: F401
    DelayLine,
    LinkConfig,
    PoseFrame,
    PosePublisher,
    ThrustFrame,
    decode_pose_frame,
    decode_thrust_frame,
    encode_pose_frame,
    encode_thrust_frame,
    lossy_send,
)
from .orchestrator import (  # noqa: F401
    RunLog,
    ScenarioConfig,
    estimate_velocity,
    replay,
    run_scenario,
)
