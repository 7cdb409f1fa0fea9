from dataclasses import dataclass


@dataclass
class PassCounter:
    """
    Network passes spent by a method.

    `forward` and `backward` count the passes needed to produce the
    prediction; `diagnostic` counts forwards spent only on reporting
    (loss after adaptation, idempotence error of the final prediction).
    """
    forward: int = 0
    backward: int = 0
    diagnostic: int = 0

    def __iadd__(self, other: "PassCounter") -> "PassCounter":
        self.forward += other.forward
        self.backward += other.backward
        self.diagnostic += other.diagnostic
        return self

    def __add__(self, other: "PassCounter") -> "PassCounter":
        total = PassCounter(self.forward, self.backward, self.diagnostic)
        total += other
        return total
