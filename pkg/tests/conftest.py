from __future__ import annotations

import importlib.resources as ir
import json
from pathlib import Path

import pytest

from sceneforge.catalog import load_catalog
from sceneforge.corpus import extract_observations, synthesize_corpus
from sceneforge.priors import build_kb

# One corpus shared by the estimation, layout, and acceptance tests; large
# enough that the common object pairs all have well-populated sample sets.
TRAIN_SCENES = 100
TRAIN_SEED = 123


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(str(ir.files("sceneforge") / "data" / "catalog.json"))


@pytest.fixture(scope="session")
def taxonomy(catalog):
    return catalog.taxonomy


@pytest.fixture(scope="session")
def train_corpus(catalog):
    return synthesize_corpus(catalog, TRAIN_SCENES, TRAIN_SEED)


@pytest.fixture(scope="session")
def train_obs(catalog, train_corpus):
    return extract_observations(train_corpus, catalog)


@pytest.fixture(scope="session")
def kb(catalog, train_obs):
    return build_kb(train_obs, catalog.taxonomy)


@pytest.fixture(scope="session")
def layout_suite():
    path = Path(__file__).parent / "fixtures" / "layout_suite.json"
    return json.loads(path.read_text(encoding="utf-8"))["descriptions"]
