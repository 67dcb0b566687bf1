"""Exception types shared across the package."""


class TorusMapError(Exception):
    """Base class for all errors raised by this package."""


class MeshError(TorusMapError):
    """Invalid mesh topology or geometry."""


class GenusError(MeshError):
    """Surface is closed but not genus one."""

    def __init__(self, euler_characteristic, message=None):
        self.euler_characteristic = euler_characteristic
        if message is None:
            message = (
                f"surface is not genus one (Euler characteristic "
                f"{euler_characteristic}, expected 0)"
            )
        super().__init__(message)


class AxisSingularity(TorusMapError):
    """Point lies on the z-axis; azimuthal angle undefined."""


class CoreSingularity(TorusMapError):
    """Point lies on the core circle of radius R; elevation angle undefined."""


class NotOnManifold(TorusMapError):
    """Point violates the torus equation beyond tolerance."""


class DegenerateImageFace(TorusMapError):
    """Image triangle has zero area; cotangent weights undefined."""


class ZeroImageArea(TorusMapError):
    """Total image area too small for the prefactored objective."""


class LoopError(TorusMapError):
    """Invalid homology loop input."""


class NotSimpleError(LoopError):
    """Loop repeats a vertex."""


class IndependenceError(LoopError):
    """Loops are homologically dependent (degenerate period matrix)."""


class CutNotDisk(TorusMapError):
    """Cutting along the loops did not produce a topological disk."""


class SingularPeriods(TorusMapError):
    """Period matrix of the holomorphic forms is singular."""


class SingularLattice(TorusMapError):
    """Lattice vectors of the fundamental domain are linearly dependent."""


class NotDescent(TorusMapError):
    """Line search started with a non-negative directional derivative."""


class LineSearchFailure(TorusMapError):
    """Line search could not produce a decreasing step."""
