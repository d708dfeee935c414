import numpy as np
import pytest

from fairgen.cohort import AttributeVocabulary


@pytest.fixture
def vocab():
    return AttributeVocabulary()


@pytest.fixture
def rng():
    return np.random.Generator(np.random.PCG64(12345))
