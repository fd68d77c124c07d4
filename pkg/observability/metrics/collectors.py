"""Prometheus metrics collectors for search and R0 runs."""

from prometheus_client import Counter, Gauge, Histogram

anneal_steps_total = Counter(
    'zerofree_anneal_steps_total',
    'Annealing steps by outcome (accepted, rejected, constraint)',
    ['outcome']
)

anneal_chains_total = Counter(
    'zerofree_anneal_chains_total',
    'Annealing chains by final status',
    ['status']
)

anneal_best_objective = Gauge(
    'zerofree_anneal_best_objective',
    'Best Landau objective of the latest multi-chain run',
    ['degree']
)

r0_rounds_total = Counter(
    'zerofree_r0_rounds_total',
    'Outer rounds of the R0 iteration'
)

r0_value = Gauge(
    'zerofree_r0_value',
    'Latest R0 produced by an outer round'
)

r0_round_duration_seconds = Histogram(
    'zerofree_r0_round_duration_seconds',
    'Wall time of one outer round',
    buckets=[0.1, 0.5, 1.0, 5.0, 10.0, 30.0, 60.0, 300.0]
)
