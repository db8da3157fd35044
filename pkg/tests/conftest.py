from fractions import Fraction

import pytest

from explodingmoments.profiles import (
    design_correlated_sign_law,
    profile_of_scalar_law,
    profile_of_sparse_law,
    sign_scalar_law,
)


@pytest.fixture(scope="session")
def sign_pair_law():
    return design_correlated_sign_law(Fraction(1, 2))


@pytest.fixture(scope="session")
def sign_pair_profile(sign_pair_law):
    return profile_of_sparse_law(sign_pair_law, kmax=12)


@pytest.fixture(scope="session")
def sign_law():
    return sign_scalar_law()


@pytest.fixture(scope="session")
def sign_profile(sign_law):
    return profile_of_scalar_law(sign_law, kmax=12)
