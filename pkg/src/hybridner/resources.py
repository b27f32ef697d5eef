"""Access to the rule file, sample gazetteers and fixture shipped with the package."""
from __future__ import annotations

from importlib import resources
from pathlib import Path

from .corpus import EntityType
from .gazetteer import load_gazetteer
from .rules import load_ruleset

# file stem -> entity type of the shipped lists
DEFAULT_GAZETTEERS = {
    "person": EntityType.PER,
    "location": EntityType.LOC,
    "organization": EntityType.ORG,
    "city": EntityType.LOC,
}


def data_path(*parts) -> Path:
    return Path(str(resources.files("hybridner").joinpath("data", *parts)))


def default_gazetteers(names=None) -> list:
    names = DEFAULT_GAZETTEERS if names is None else names
    return [load_gazetteer(data_path("gazetteers", f"{n}.txt"), DEFAULT_GAZETTEERS[n], n) for n in names]


def lexicons(gazetteers) -> dict:
    """Gazetteers keyed by name, for ``[lex:NAME]`` rule predicates."""
    return {g.name: g for g in gazetteers}


def default_ruleset(gazetteers=None):
    gazetteers = default_gazetteers() if gazetteers is None else gazetteers
    return load_ruleset(data_path("default.rules"), lexicons(gazetteers))


def fixture_path() -> Path:
    return data_path("fixture.conll")
