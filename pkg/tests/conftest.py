import pytest

from hanlink.assets import load_bundle


@pytest.fixture(scope="session")
def bundle():
    return load_bundle()


@pytest.fixture(scope="session")
def name_model(bundle):
    from hanlink.simgen import build_name_model
    return build_name_model(bundle.corpus, bundle.tables)
