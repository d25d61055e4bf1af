"""Exception types shared across the deblurring pipeline."""


class FftDeblurError(Exception):
    """Base class for all package errors."""


class KernelTooLarge(FftDeblurError):
    """Kernel support exceeds the plane it is applied to."""


class PadTooSmall(FftDeblurError):
    """Requested padded size is smaller than the source plane."""


class DegenerateKernel(FftDeblurError):
    """Blind estimation collapsed to an empty kernel support."""


class EmptyKernel(FftDeblurError):
    """Kernel has no positive mass."""


class AllZeroGradients(FftDeblurError):
    """Every selected gradient is zero; PSF estimation is impossible."""


class NonFiniteState(FftDeblurError):
    """A solver update produced NaN or Inf values."""


class DimensionMismatch(FftDeblurError):
    """Operands do not share dimensions."""


class ImageTooSmall(FftDeblurError):
    """Image is smaller than the metric's window."""
