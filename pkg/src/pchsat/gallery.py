"""Worked models used in the docs, tests and CLI smoke runs."""

from __future__ import annotations

from fractions import Fraction

from .model import ExogenousSpec, JointTable, Mechanism, Scm


def vaccination_scm() -> Scm:
    """Age Z, vaccination X, recovery Y driven by three independent coins.

    P(U1=1)=2/5, P(U2=1)=21/100, P(U3=1)=9/10 and

        Z := U1
        X := Z*U2 + (1-Z)*(1-U2)
        Y := X*Z + (1-X)*(1-U3) + X*(1-Z)*U3
    """
    exo = ExogenousSpec.independent(
        {
            "U1": (Fraction(3, 5), Fraction(2, 5)),
            "U2": (Fraction(79, 100), Fraction(21, 100)),
            "U3": (Fraction(1, 10), Fraction(9, 10)),
        }
    )
    d = exo.domains
    mechs = {
        "Z": Mechanism.from_function("Z", (), ("U1",), 2, d, lambda u1: u1),
        "X": Mechanism.from_function("X", ("Z",), ("U2",), 2, d, lambda z, u2: z * u2 + (1 - z) * (1 - u2)),
        "Y": Mechanism.from_function(
            "Y", ("Z", "X"), ("U3",), 2, d,
            lambda z, x, u3: x * z + (1 - x) * (1 - u3) + x * (1 - z) * u3,
        ),
    }
    return Scm(2, ("Z", "X", "Y"), mechs, exo)


# Observed distribution P(z, x, y) of the vaccination model, as printed.
VACCINATION_OBSERVED = {
    (0, 0, 0): "0.1134",
    (0, 0, 1): "0.0126",
    (0, 1, 0): "0.0474",
    (0, 1, 1): "0.4266",
    (1, 0, 0): "0.2844",
    (1, 0, 1): "0.0316",
    (1, 1, 1): "0.0840",
}

# P([X=1] z, y) after forcing vaccination.
VACCINATION_DO_X1 = {
    (0, 0): "0.06",
    (0, 1): "0.54",
    (1, 0): "0.00",
    (1, 1): "0.40",
}


def vaccination_observed() -> JointTable:
    return JointTable(2, ("Z", "X", "Y"), {k: Fraction(v) for k, v in VACCINATION_OBSERVED.items()})
