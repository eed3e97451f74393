"""Run the desk-scale Interest flood and print its summary and PIT trace."""

from icnsim.scenarios.catalog import get_scenario, run_scenario

res = run_scenario(get_scenario("flood-nonexistent", desk=True))
print("\n".join(res.summary.lines()))
t, pit = res.series.series("R1", "pit_size")
for second in range(0, int(t[-1]) + 1, 10):
    i = min(int(second / res.series.interval_s), len(pit) - 1)
    print(f"t={t[i]:6.1f}s  R1 PIT {pit[i]:8.0f}")
