"""
OpenTelemetry metrics for solver observability.

Exports run metrics (steps taken, solve duration, blow-ups, Picard stages, sweep
points) via OTLP to an OpenTelemetry Collector when OTEL_EXPORTER_OTLP_ENDPOINT is
set. Without an endpoint the instruments still record in-process.

Metrics are fire-and-forget: if the collector is down, runs continue normally.
"""

import os

from opentelemetry import metrics
from opentelemetry.exporter.otlp.proto.grpc.metric_exporter import OTLPMetricExporter
from opentelemetry.sdk.metrics import MeterProvider
from opentelemetry.sdk.metrics.export import PeriodicExportingMetricReader
from opentelemetry.sdk.resources import Resource

from common.logging_config import get_logger

logger = get_logger("common_metrics")

# OTEL Collector endpoint; batch runs only export when one is configured
OTEL_ENDPOINT = os.environ.get("OTEL_EXPORTER_OTLP_ENDPOINT")

_resource = Resource.create({"service.name": "radial-wave-lab"})

try:
    _readers = []
    if OTEL_ENDPOINT:
        _exporter = OTLPMetricExporter(endpoint=OTEL_ENDPOINT, insecure=True)
        _readers.append(PeriodicExportingMetricReader(_exporter, export_interval_millis=5000))
    _provider = MeterProvider(resource=_resource, metric_readers=_readers)
    metrics.set_meter_provider(_provider)
    if OTEL_ENDPOINT:
        logger.info(f"OpenTelemetry metrics enabled, exporting to {OTEL_ENDPOINT}")
except Exception as e:
    logger.warning(f"OpenTelemetry setup failed (metrics disabled): {e}")
    _provider = None

_meter = metrics.get_meter("wavelab", version="0.1.0")

solver_steps = _meter.create_counter(
    name="solver.steps",
    description="Leapfrog time steps taken",
    unit="steps",
)

solver_duration = _meter.create_histogram(
    name="solver.duration",
    description="Wall time of one solve (ms)",
    unit="ms",
)

solver_blowups = _meter.create_counter(
    name="solver.blowups",
    description="Runs stopped by the blow-up criterion",
    unit="runs",
)

picard_iterations = _meter.create_counter(
    name="picard.iterations",
    description="Picard stages solved",
    unit="stages",
)

experiment_points = _meter.create_counter(
    name="experiments.points",
    description="Sweep points completed",
    unit="points",
)
