import pytest

from clpositivity import EvolvedDensity, HermiteGaussState, ModelParams

# Parameter sets of the figure reproductions (dimensionless, omega = 1)
FIG1 = dict(gamma=0.35, temperature=0.5)
FIG2_GAMMA = 0.01
CASE_II = dict(gamma=0.15, temperature=4.49, cutoff=1.25, case="II")
CASE_III = dict(gamma=0.15, temperature=4.49, cutoff=1.25, case="III")


def all_case_params():
    return [
        ModelParams(**FIG1),
        ModelParams(**CASE_II),
        ModelParams(**CASE_III),
        ModelParams(gamma=0.35, case="IV"),
    ]


@pytest.fixture
def fig1_evolved():
    def make(n=0, beta=0.6):
        return EvolvedDensity(HermiteGaussState(n, beta), ModelParams(**FIG1))

    return make
