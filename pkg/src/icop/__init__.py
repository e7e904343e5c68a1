"""Contact-tracking, collision-free trajectory generation for a 6-DOF arm.

Plans joint-space trajectories whose tool tip follows a Cartesian path inside
a confined tunnel workpiece. Each waypoint is reached by iterating three
steps until the tracking residual drops below a threshold: linearize the
collision distance into a half-space (convex feasible set), linearize the
contact equality through the body-point Jacobian, and solve the resulting
small quadratic program.
"""

__version__ = "0.1.0"
