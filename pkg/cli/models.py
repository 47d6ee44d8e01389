from django.db import models


class RunRecord(models.Model):
    class Command(models.TextChoices):
        GEN = "gen", "Generate"
        EMBED = "embed", "Embed"
        SOLVE = "solve", "Solve"
        BENCH = "bench", "Benchmark"
        REPORT = "report", "Report"

    command = models.CharField(max_length=20, choices=Command.choices)
    arguments = models.CharField(max_length=255, blank=True)
    config = models.JSONField(default=dict)
    base_seed = models.BigIntegerField(null=True, blank=True)
    version = models.CharField(max_length=20)
    started_at = models.DateTimeField()
    finished_at = models.DateTimeField()
    output_dir = models.CharField(max_length=500)
    digests = models.JSONField(default=dict) # file name -> sha256

    class Meta:
        ordering = ['-started_at']

    def __str__(self):
        return f"{self.command} {self.arguments} @ {self.started_at:%Y-%m-%d %H:%M}".strip()

    @property
    def duration(self):
        return (self.finished_at - self.started_at).total_seconds()
