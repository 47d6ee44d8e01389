import hashlib
import json
import math

from rest_framework import serializers

from graphs.topology import Graph

from .model import IsingModel


class CouplingField(serializers.ListField):
    child = serializers.FloatField()

    def to_internal_value(self, data):
        values = super().to_internal_value(data)
        if len(values) != 3:
            raise serializers.ValidationError("each coupling must be [u, v, weight]")
        u, v, weight = values
        if not (math.isfinite(u) and math.isfinite(v)) or u != int(u) or v != int(v) or u < 0 or v < 0:
            raise serializers.ValidationError("coupling endpoints must be non-negative integers")
        return int(u), int(v), weight


class IsingModelSerializer(serializers.Serializer):
    """``{"n": int, "h": {node: real}, "J": [[u, v, real], ...]}``"""

    n = serializers.IntegerField(min_value=0)
    h = serializers.DictField(child=serializers.FloatField())
    J = serializers.ListField(child=CouplingField())

    def validate_h(self, value):
        try:
            return {int(k): v for k, v in value.items()}
        except ValueError:
            raise serializers.ValidationError("h keys must be integer node ids")

    def validate(self, attrs):
        if attrs['n'] != len(attrs['h']):
            raise serializers.ValidationError("n must equal the number of biases in h")
        for u, v, _ in attrs['J']:
            if u not in attrs['h'] or v not in attrs['h']:
                raise serializers.ValidationError(f"coupling ({u}, {v}) references a node without a bias")
        return attrs

    def create(self, validated_data):
        graph = Graph.from_edges(((u, v) for u, v, _ in validated_data['J']), validated_data['h'])
        couplings = {}
        for u, v, weight in validated_data['J']:
            key = (u, v) if u < v else (v, u)
            if key in couplings:
                raise serializers.ValidationError(f"duplicate coupling {key}")
            couplings[key] = weight
        return IsingModel(graph=graph, h=validated_data['h'], J=couplings)


def ising_to_dict(m):
    return {
        'n': len(m.nodes),
        'h': {str(node): m.h[node] for node in m.nodes},
        'J': [[u, v, m.J[(u, v)]] for u, v in m.graph.sorted_edges],
    }


def ising_from_dict(data):
    serializer = IsingModelSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()


def dump_ising(m):
    return json.dumps(ising_to_dict(m), indent=1) + "\n"


def load_ising(text):
    return ising_from_dict(json.loads(text))


def model_fingerprint(m):
    return hashlib.sha256(dump_ising(m).encode('utf-8')).hexdigest()
