"""Experiment configuration: flat ``KEY=value`` files read with python-dotenv
and validated by a serializer. List values are comma separated."""
import logging
from dataclasses import asdict, dataclass, fields

from dotenv import dotenv_values
from rest_framework import serializers

from graphs.edgelist import load_edge_list
from graphs.topology import ChimeraSpec, break_graph, generate_chimera
from minorbench.seeds import derive_seed

logger = logging.getLogger(__name__)

DESK_SIZES = tuple(range(8, 49, 4))
DESK_DENSITIES = (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0)


@dataclass(frozen=True)
class ExperimentConfig:
    sizes: tuple = DESK_SIZES
    densities: tuple = DESK_DENSITIES
    problems_per_cell: int = 1
    embeddings_per_problem: int = 10
    patience_values: tuple = tuple(range(11))
    prefactors: tuple = (0.5, 0.75, 1.0, 1.414, 2.0)
    general_prefactor: float = 1.414
    reads: int = 500
    sweeps: int = 1000
    chimera_m: int = 4
    target_edge_list: str = None
    node_drop: float = 0.0
    edge_drop: float = 0.0
    base_seed: int = 0
    trial_count: int = 32
    tries: int = 1
    max_passes: int = 1000
    rq2_patience: int = 10
    reference_restarts: int = 4
    timeout: float = None
    hardware_native: bool = True
    box_density: float = 0.5
    box_size: int = None

    def target(self):
        if self.target_edge_list:
            graph = load_edge_list(self.target_edge_list)
        else:
            graph = generate_chimera(ChimeraSpec(self.chimera_m))
        if self.node_drop or self.edge_drop:
            graph = break_graph(graph, self.node_drop, self.edge_drop, derive_seed(self.base_seed, 'target'))
        return graph

    def echo(self):
        return {key: list(value) if isinstance(value, tuple) else value for key, value in asdict(self).items()}


class CommaSeparatedField(serializers.ListField):
    def to_internal_value(self, data):
        if isinstance(data, str):
            data = [item.strip() for item in data.split(',') if item.strip()]
        return super().to_internal_value(data)


class ExperimentConfigSerializer(serializers.Serializer):
    sizes = CommaSeparatedField(child=serializers.IntegerField(min_value=1), min_length=1, required=False)
    densities = CommaSeparatedField(
        child=serializers.FloatField(min_value=0.0, max_value=1.0), min_length=1, required=False
    )
    problems_per_cell = serializers.IntegerField(min_value=1, required=False)
    embeddings_per_problem = serializers.IntegerField(min_value=1, required=False)
    patience_values = CommaSeparatedField(child=serializers.IntegerField(min_value=0), min_length=1, required=False)
    prefactors = CommaSeparatedField(child=serializers.FloatField(min_value=0.0), min_length=1, required=False)
    general_prefactor = serializers.FloatField(min_value=0.0, required=False)
    reads = serializers.IntegerField(min_value=1, required=False)
    sweeps = serializers.IntegerField(min_value=1, required=False)
    chimera_m = serializers.IntegerField(min_value=1, required=False)
    target_edge_list = serializers.CharField(required=False, allow_null=True)
    node_drop = serializers.FloatField(min_value=0.0, max_value=0.999999, required=False)
    edge_drop = serializers.FloatField(min_value=0.0, max_value=0.999999, required=False)
    base_seed = serializers.IntegerField(min_value=0, required=False)
    trial_count = serializers.IntegerField(min_value=1, required=False)
    tries = serializers.IntegerField(min_value=1, required=False)
    max_passes = serializers.IntegerField(min_value=0, required=False)
    rq2_patience = serializers.IntegerField(min_value=0, required=False)
    reference_restarts = serializers.IntegerField(min_value=1, required=False)
    timeout = serializers.FloatField(min_value=0.0, required=False, allow_null=True)
    hardware_native = serializers.BooleanField(required=False)
    box_density = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    box_size = serializers.IntegerField(min_value=1, required=False, allow_null=True)

    def validate_prefactors(self, value):
        if any(v <= 0 for v in value):
            raise serializers.ValidationError("prefactors must be > 0")
        return value

    def create(self, validated_data):
        values = {
            key: tuple(value) if isinstance(value, list) else value
            for key, value in validated_data.items()
        }
        return ExperimentConfig(**values)


def config_from_mapping(mapping):
    known = {f.name for f in fields(ExperimentConfig)}
    data = {}
    for key, value in mapping.items():
        name = key.lower()
        if name not in known:
            raise serializers.ValidationError({key: "unknown configuration key"})
        if value is None or value == '':
            continue
        data[name] = value
    serializer = ExperimentConfigSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def load_config(path):
    config = config_from_mapping(dotenv_values(path))
    logger.debug(f"Loaded experiment config from {path}")
    return config
