import pytest

from qwoa_cvrp import cvrp


@pytest.fixture(scope="session")
def example_instance():
    return cvrp.example_instance_3()


@pytest.fixture(scope="session")
def example_table(example_instance):
    return cvrp.build_quality_table(example_instance)


@pytest.fixture(scope="session")
def reference_instance():
    return cvrp.reference_instance_8()


@pytest.fixture(scope="session")
def reference_table(reference_instance):
    return cvrp.build_quality_table(reference_instance)
