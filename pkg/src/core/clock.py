import time


class Clock:
    """
    Monotonic clock used to stamp certificate durations.
    """

    @staticmethod
    def now_us() -> int:
        """Monotonic time in microseconds (int64)."""
        return time.monotonic_ns() // 1000

    @staticmethod
    def elapsed_ms(start_us: int) -> int:
        return (Clock.now_us() - start_us) // 1000


class Stopwatch:
    def __init__(self):
        self._start = Clock.now_us()

    def elapsed_ms(self) -> int:
        return Clock.elapsed_ms(self._start)
