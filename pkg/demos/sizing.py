"""Print PIT sizing tables and compare one prediction with a short simulation."""

from icnsim.analytic import RttModel, predict_vs_simulate, sizing_table, states_table
from icnsim.pit import PitSpec
from icnsim.router import RouterConfig
from icnsim.sim import Consumer, PoissonRequests, Repository, Simulation, build_chain, gamma_delay

print("line rate (bit/s)   PIT entries")
for cap, n in sizing_table():
    print(f"{cap:>17.0e}   {n:>12,.0f}")

rtt = RttModel.gamma(0.1, 0.1)
print("\nrequests/s   mean states (RTT 100 ms +/- 100 ms, kappa 4)")
for alpha, n in states_table([100, 500, 1000], rtt, kappa=4):
    print(f"{alpha:>10g}   {n:>10.1f}")

consumer = Consumer("consumer", PoissonRequests(500))
topo = build_chain(1, 1e14, RouterConfig(cpu_hz=1e15, pit=PitSpec(capacity=1_000_000)), consumer=consumer,
                   repository=Repository(delay_us=gamma_delay(100_000, 100_000)), propagation_us=0, seed=1)
series = Simulation(1).run(topo, [consumer], 31.0)
for kappa in (0, 4):
    r = predict_vs_simulate(series, "R1", 500, rtt, (1.0, 31.0), kappa=kappa)
    print(f"\nkappa {kappa}: predicted {r['predicted']:.1f}, simulated {r['simulated']:.1f}")
