# Generated by Django 5.2.8 on 2026-10-19 09:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='RunRecord',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('gen', 'Generate'), ('embed', 'Embed'), ('solve', 'Solve'), ('bench', 'Benchmark'), ('report', 'Report')], max_length=20)),
                ('arguments', models.CharField(blank=True, max_length=255)),
                ('config', models.JSONField(default=dict)),
                ('base_seed', models.BigIntegerField(blank=True, null=True)),
                ('version', models.CharField(max_length=20)),
                ('started_at', models.DateTimeField()),
                ('finished_at', models.DateTimeField()),
                ('output_dir', models.CharField(max_length=500)),
                ('digests', models.JSONField(default=dict)),
            ],
            options={
                'ordering': ['-started_at'],
            },
        ),
    ]
