"""Shared helpers for coordinator tests."""

from designhub.coordinator import CoordinatorConfig, run
from designhub.executors.synthetic import SyntheticExecutor
from designhub.scheduler import ResourcePool


async def execute(specs, params=None, config=None, pool=None, clock=None, log_dir=None):
    """Run specs on the synthetic executor; returns (report, coordinator)"""
    config = config or CoordinatorConfig(root_seed=7)
    executor = SyntheticExecutor(params, root_seed=config.root_seed)
    return await run(specs, pool or ResourcePool(28, 4), executor, clock, config, log_dir=log_dir)
