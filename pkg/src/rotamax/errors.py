"""Exception types raised by rotamax."""


class RotamaxError(Exception):
    """Base class for all package-specific errors."""


class ZeroLineError(RotamaxError):
    """Pixel line coefficients are numerically zero."""


class SingularIntrinsicsError(RotamaxError):
    """Camera intrinsics matrix is singular and cannot map pixel lines."""


class DegenerateAlphaKError(RotamaxError):
    """alpha_k is too close to pi/2 for the tangent-based stationary formula."""


class DegenerateLineError(RotamaxError):
    """Sampled 3-D line passes through the camera center; direction is undefined."""


class EmptyDataError(RotamaxError):
    """No correspondences were supplied."""
