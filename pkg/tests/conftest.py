import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile("default")


@pytest.fixture(scope="session")
def sg3():
    from fracspec import get_system

    return get_system("sg3")


@pytest.fixture(scope="session")
def sg():
    from fracspec import get_system

    return get_system("sg")


@pytest.fixture(scope="session")
def interval():
    from fracspec import get_system

    return get_system("interval")
