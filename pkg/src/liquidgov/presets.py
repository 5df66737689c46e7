"""Named points in the governance configuration space, loaded from presets.yaml."""

from __future__ import annotations

import importlib.resources
from functools import lru_cache
from pathlib import Path
from typing import Optional

import yaml

from .model import GovernanceConfig, NotFoundError, validate_config

PRESET_NAMES = (
    "direct_democracy",
    "swiss_votation",
    "informal_liquid",
    "representative",
    "liquid_delegation",
    "civic_participatory",
)

# candidacy x transferability grid cell each quadrant name denotes
QUADRANTS = {
    (False, False): "direct_democracy",
    (False, True): "informal_liquid",
    (True, False): "representative",
    (True, True): "liquid_delegation",
}


@lru_cache(maxsize=1)
def _load_documents(path: Optional[str] = None) -> dict[str, dict]:
    if path is None:
        text = importlib.resources.files("liquidgov").joinpath("presets.yaml").read_text()
    else:
        text = Path(path).read_text()
    docs = {}
    for doc in yaml.safe_load_all(text):
        if doc:
            docs[doc["name"]] = doc
    return docs


def load_presets(path: Optional[str] = None) -> dict[str, dict]:
    """Raw preset documents keyed by name; pass a path to override the bundled file."""
    return _load_documents(path)


def preset_quadrant(name: str) -> str:
    docs = _load_documents()
    if name not in docs:
        raise NotFoundError(f"unknown preset: {name}")
    return docs[name]["quadrant"]


def apply_preset(name: str) -> GovernanceConfig:
    """Build the full configuration for a named preset.

    The result always passes validate_config; a preset file shipping an invalid
    configuration is a packaging bug and raises immediately.
    """
    docs = _load_documents()
    if name not in docs:
        raise NotFoundError(f"unknown preset: {name}")
    config = GovernanceConfig.from_dict(docs[name])
    violations = validate_config(config)
    if violations:
        raise ValueError(f"preset {name} is invalid: {violations}")
    return config
