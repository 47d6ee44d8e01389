from django.contrib import admin
from .models import RunRecord


@admin.register(RunRecord)
class RunRecordAdmin(admin.ModelAdmin):
    list_display = ('command', 'arguments', 'base_seed', 'version', 'started_at', 'duration_seconds', 'file_count')
    list_filter = ('command', 'version')
    search_fields = ('arguments', 'output_dir')
    readonly_fields = ('config', 'digests')

    def duration_seconds(self, obj):
        return round(obj.duration, 3)

    def file_count(self, obj):
        return len(obj.digests)
