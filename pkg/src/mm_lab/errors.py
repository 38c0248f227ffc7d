"""Exception types shared across the library."""


class MMLabError(Exception):
    """Base class for every error raised by mm-lab."""


class TriangleViolation(MMLabError):
    def __init__(self, i, j, k, gap):
        self.i, self.j, self.k, self.gap = i, j, k, gap
        super().__init__(f"triangle inequality fails at ({i},{j},{k}), gap {gap:.3e}")


class NegativeWeight(MMLabError):
    def __init__(self, i, value):
        self.i, self.value = i, value
        super().__init__(f"weight[{i}] = {value} is negative")


class NotNormalized(MMLabError):
    def __init__(self, total):
        self.total = total
        super().__init__(f"weights sum to {total!r}, expected 1 within 1e-12")


class HostMismatch(MMLabError):
    pass


class TooLarge(MMLabError):
    def __init__(self, n, bound):
        self.n, self.bound = n, bound
        super().__init__(f"instance has {n} points, exhaustive bound is {bound}")


class CapExceeded(MMLabError):
    def __init__(self, n, cap):
        self.n, self.cap = n, cap
        super().__init__(f"{n} points exceeds configured cap {cap}")


class ArityMismatch(MMLabError):
    pass


class NotIncreasing(MMLabError):
    def __init__(self, s0, s1, v0, v1):
        self.witness = (s0, s1, v0, v1)
        super().__init__(f"generator not increasing: phi({s0})={v0} vs phi({s1})={v1}")


class InconsistentArity(MMLabError):
    pass


class BadAlpha(MMLabError):
    pass


class BadKappa(MMLabError):
    pass


class MetricViolation(MMLabError):
    def __init__(self, witness, message):
        self.witness = witness
        super().__init__(message)


class NotLipschitz(MMLabError):
    pass


class NotRational(MMLabError):
    pass


class TargetTooLarge(MMLabError):
    pass


class WitnessInvalid(MMLabError):
    pass


class NotTriangleTriplet(MMLabError):
    pass


class BadSpec(MMLabError):
    pass
