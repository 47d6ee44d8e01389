"""Run manifests written next to every command's results."""
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

from django.conf import settings
from django.utils import timezone

from minorbench import __version__

logger = logging.getLogger(__name__)

# Fields that come from Django's BaseCommand, not from the command itself.
_DJANGO_OPTIONS = {
    'verbosity', 'settings', 'pythonpath', 'traceback', 'no_color', 'force_color',
    'skip_checks', 'stdout', 'stderr',
}


def file_digest(path):
    digest = hashlib.sha256()
    with open(path, 'rb') as handle:
        for block in iter(lambda: handle.read(1 << 16), b''):
            digest.update(block)
    return digest.hexdigest()


def config_echo(options):
    """Command options as plain JSON values."""
    echo = {}
    for key, value in sorted(options.items()):
        if key in _DJANGO_OPTIONS or callable(value):
            continue
        if isinstance(value, Path):
            value = str(value)
        elif isinstance(value, tuple):
            value = list(value)
        echo[key] = value
    return echo


@dataclass
class RunManifest:
    command: str
    arguments: str = ''
    config: dict = field(default_factory=dict)
    base_seed: int = None
    started_at: object = field(default_factory=timezone.now)
    finished_at: object = None
    version: str = __version__
    digests: dict = field(default_factory=dict)

    def add_output(self, path):
        path = Path(path)
        self.digests[path.name] = file_digest(path)

    def as_dict(self):
        return {
            'command': self.command,
            'arguments': self.arguments,
            'config': self.config,
            'base_seed': self.base_seed,
            'started_at': self.started_at.isoformat(),
            'finished_at': self.finished_at.isoformat() if self.finished_at else None,
            'version': self.version,
            'digests': dict(sorted(self.digests.items())),
        }

    def write(self, path):
        """Finish the run, write the manifest JSON and record it if enabled."""
        path = Path(path)
        self.finished_at = timezone.now()
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.as_dict(), indent=2) + "\n", encoding='utf-8')
        logger.info(f"Wrote manifest {path}")
        if settings.MINOR_EMBEDDING['RECORD_RUNS']:
            self.record(path.parent)
        return path

    def record(self, output_dir):
        from .models import RunRecord

        return RunRecord.objects.create(
            command=self.command,
            arguments=self.arguments,
            config=self.config,
            base_seed=self.base_seed,
            version=self.version,
            started_at=self.started_at,
            finished_at=self.finished_at or timezone.now(),
            output_dir=str(output_dir),
            digests=self.digests,
        )


def manifest_path_for(output):
    """``result.json`` -> ``result.manifest.json`` in the same directory."""
    output = Path(output)
    return output.with_name(f"{output.stem}.manifest.json")


def verify(manifest_path):
    """Names of outputs whose current digest differs from the manifest."""
    manifest_path = Path(manifest_path)
    recorded = json.loads(manifest_path.read_text(encoding='utf-8'))['digests']
    return sorted(
        name for name, digest in recorded.items()
        if not (manifest_path.parent / name).exists()
        or file_digest(manifest_path.parent / name) != digest
    )
