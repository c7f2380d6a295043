"""Small court builders shared by the tests."""
from puttloop.court import Court, Obstacle, ObstacleKind, Pose, validate_court
from puttloop.geometry import Vec2


def disk_court(x=1.25, y=1.0, start=(0.25, 1.0), kind=ObstacleKind.DiskEndpoint, extra=()):
    hole = Obstacle("hole", kind, Pose((x, y), 0.0), {})
    return validate_court(Court(Vec2(*start), (hole,) + tuple(extra), name="disk-court"))


def empty_court(start=(0.25, 1.0)):
    """No obstacles on the playing field: the only endpoint sits in a corner."""
    hole = Obstacle("hole", ObstacleKind.DiskEndpoint, Pose((2.84, 0.16), 0.0), {})
    return validate_court(Court(Vec2(*start), (hole,), name="empty"))
