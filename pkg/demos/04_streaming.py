"""
Sliding the observation window over a recording
===============================================

A 20 s recording is processed as 5 s windows that advance by 0.5 s, which
gives 31 windows. A spike stays in view for ten consecutive windows, and
those detections merge into one alert.
"""

from bpdd.bench import make_feed
from bpdd.stream import StreamConfig, run_stream

rows, ids, truth = make_feed(seed=3, kind="spike", seconds=20.0)
print("injected:", truth[0])


def show(report, alerts):
    if report.anomalies:
        locs = [loc for a in report.anomalies for loc in a.channel_locations]
        print(f"window {report.window_id:2d}: {locs}")


result = run_stream(rows, StreamConfig(window_seconds=5.0, step_seconds=0.5), dt=0.01, channel_ids=ids, on_report=show)
print(len(result.reports), "windows processed")
for alert in result.alerts:
    print(f"alert first seen at t={alert.first_seen:.2f} s in windows {alert.windows[0]}-{alert.windows[-1]}: {alert.locations}")
