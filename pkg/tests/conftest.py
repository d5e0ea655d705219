import pytest

from turbobec.pccc import hamming_spec, make_turbo_code, toy_spec
from turbobec.stopsets import brute_force_stopping_sets
from turbobec.trellis import ConvCodeSpec

# canonical (2,1,nu) codes, one per memory, used for the complexity table
REFERENCE_CODES = {
    2: ["1+D^2", "1+D+D^2"],
    3: ["1+D+D^3", "1+D^2+D^3"],
    4: ["1+D+D^2+D^4", "1+D^3+D^4"],
    5: ["1+D^2+D^5", "1+D+D^2+D^3+D^5"],
    6: ["1+D+D^6", "1+D+D^2+D^3+D^4+D^6"],
}


def reference_code(nu: int) -> ConvCodeSpec:
    return ConvCodeSpec.from_strings([REFERENCE_CODES[nu]])


@pytest.fixture(scope="session")
def toy():
    return make_turbo_code(toy_spec())


@pytest.fixture(scope="session")
def ham_id():
    return make_turbo_code(hamming_spec((0, 1, 2, 3)))


@pytest.fixture(scope="session")
def ham_rev():
    return make_turbo_code(hamming_spec((3, 2, 1, 0)))


@pytest.fixture(scope="session")
def toy_sets(toy):
    return brute_force_stopping_sets(toy, toy.N)
