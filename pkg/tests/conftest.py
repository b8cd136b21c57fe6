import numpy as np
import pytest

from torsionlab import charclass, famtor

OMEGA = np.exp(2j * np.pi / 3)


@pytest.fixture(scope="session")
def circle_bundle_integrals():
    """Degree-1 torsion integrals of the circle-bundle family at resolution 64,
    shared across the acceptance criteria that need them."""
    out = {}
    for key, (n, u) in {
        "I3": (3, OMEGA),
        "I6": (6, OMEGA),
        "I3bar": (3, np.conj(OMEGA)),
        "I2m": (2, -1.0 + 0.0j),
    }.items():
        fam = famtor.circle_bundle_family(n, u, 64)
        out[key] = famtor.torsion_form(fam, 1).integral
    out["im_dilog"] = float(np.imag(charclass.dilog(OMEGA)))
    out["kappa"] = out["I3"] / (3.0 * out["im_dilog"])
    return out
