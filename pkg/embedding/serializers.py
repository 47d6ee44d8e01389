from rest_framework import serializers

from .core import Embedding, EmbeddingError


class EmbeddingSerializer(serializers.Serializer):
    """``{"chains": {source_id: [target_id, ...]}}``"""

    chains = serializers.DictField(
        child=serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=False)
    )

    def validate_chains(self, value):
        try:
            return {int(k): v for k, v in value.items()}
        except ValueError:
            raise serializers.ValidationError("chain keys must be integer source ids")

    def create(self, validated_data):
        try:
            return Embedding.from_chains(validated_data['chains'])
        except EmbeddingError as exc:
            raise serializers.ValidationError(str(exc))


class CliqueCacheSerializer(EmbeddingSerializer):
    fingerprint = serializers.CharField()
    m = serializers.IntegerField(min_value=1)
    max_clique_size = serializers.IntegerField(min_value=1)


def embedding_from_dict(data):
    serializer = EmbeddingSerializer(data=data)
    serializer.is_valid(raise_exception=True)
    return serializer.save()
