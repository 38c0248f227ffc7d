from hypothesis import HealthCheck, settings

settings.register_profile(
    "mm_lab",
    max_examples=20,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("mm_lab")
