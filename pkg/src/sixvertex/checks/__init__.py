"""Exact verification of structural properties on small instances.

Each check returns :class:`CheckResult` rows. A row records how many
inequalities or identities were tested, how many failed, the largest
violation and a witness for the first failure.
"""

from dataclasses import dataclass, field
from fractions import Fraction


@dataclass
class CheckResult:
    check: str
    instance_id: str
    c: object
    tested: int = 0
    violations: int = 0
    max_violation: float = 0.0
    witness: str = ""
    explore: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def status(self):
        if self.explore:
            return "explore"
        return "pass" if self.violations == 0 else "fail"

    def record(self, ok, amount=0, witness=""):
        """Count one test; ``amount`` is the size of the violation if any."""
        self.tested += 1
        if not ok:
            self.violations += 1
            self.max_violation = max(self.max_violation, float(amount))
            if not self.witness:
                self.witness = witness

    def row(self):
        return {"check": self.check, "instance_id": self.instance_id,
                "c": format_c(self.c), "status": self.status,
                "tested": self.tested, "violations": self.violations,
                "max_violation": self.max_violation, "witness": self.witness}


def format_c(c):
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if isinstance(c, float) and c.is_integer():
        return str(int(c))
    return str(c)
