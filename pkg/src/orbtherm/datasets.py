"""Bundled ten-node Moon-orbiting satellite data."""
from importlib import resources
from pathlib import Path

from .model import HeatProfile, ThermalModel, load_model, load_profile

TEN_NODE_MODEL = "ten_node_moon.json"
TEN_NODE_CONST_PROFILE = "ten_node_const.csv"


def data_path(name: str) -> Path:
    return Path(resources.files("orbtherm") / "data" / name)


def ten_node_model() -> ThermalModel:
    return load_model(data_path(TEN_NODE_MODEL))


def ten_node_const_profile(model: ThermalModel = None) -> HeatProfile:
    model = model or ten_node_model()
    return load_profile(data_path(TEN_NODE_CONST_PROFILE), model)
