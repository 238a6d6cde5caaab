import math

import pytest
from hypothesis import settings

from ergodim.measures import BernoulliIID, LebesgueTorus, MarkovStationary
from ergodim.systems import (
    FullShift,
    ToralAutomorphism,
    TorusTranslation,
    WeightedL2Metric,
    default_weights,
)

settings.register_profile("ci", deadline=None, derandomize=True, max_examples=60)
settings.load_profile("ci")

# closed-form benchmark: the expanding eigenvalue of [[2,1],[1,1]] is (3+sqrt5)/2
LOG_LAM = math.log((3.0 + math.sqrt(5.0)) / 2.0)
LOG2 = math.log(2.0)


@pytest.fixture(scope="session")
def cat():
    return ToralAutomorphism(((2, 1), (1, 1)))


@pytest.fixture(scope="session")
def translation():
    return TorusTranslation()


@pytest.fixture(scope="session")
def dyadic_shift():
    return FullShift(alphabet_size=2)


@pytest.fixture(scope="session")
def weighted_shift():
    return FullShift(alphabet_size=2, metric=WeightedL2Metric(default_weights()))


@pytest.fixture(scope="session")
def lebesgue():
    return LebesgueTorus()


@pytest.fixture(scope="session")
def bern_half():
    return BernoulliIID((0.5, 0.5))


@pytest.fixture(scope="session")
def bern_biased():
    return BernoulliIID((0.3, 0.7))


@pytest.fixture(scope="session")
def markov():
    # aperiodic irreducible 2-state chain; rate = -sum_i pi_i sum_j P_ij log P_ij
    return MarkovStationary(((0.7, 0.3), (0.4, 0.6)))
