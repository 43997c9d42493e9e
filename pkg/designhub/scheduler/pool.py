"""
Fixed heterogeneous resource pool: CPU cores and GPUs of one pilot allocation
"""

from typing import Dict, Tuple

from ..errors import ArgumentError, CapacityError


class ResourcePool:
    """Tracks free capacity and per-task holdings"""

    def __init__(self, cpu_cores_total: int, gpus_total: int = 0):
        if cpu_cores_total < 1:
            raise ArgumentError(f"cpu_cores_total must be >= 1, got {cpu_cores_total}")
        if gpus_total < 0:
            raise ArgumentError(f"gpus_total must be >= 0, got {gpus_total}")
        self.cpu_cores_total = cpu_cores_total
        self.gpus_total = gpus_total
        self.free_cpu = cpu_cores_total
        self.free_gpu = gpus_total
        self.allocations: Dict[str, Tuple[int, int]] = {}

    def can_ever_fit(self, cpu_cores: int, gpus: int) -> bool:
        return cpu_cores <= self.cpu_cores_total and gpus <= self.gpus_total

    def fits(self, cpu_cores: int, gpus: int) -> bool:
        return cpu_cores <= self.free_cpu and gpus <= self.free_gpu

    def holding(self, task_id: str) -> Tuple[int, int]:
        return self.allocations.get(task_id, (0, 0))

    def allocate(self, task_id: str, cpu_cores: int, gpus: int) -> None:
        if task_id in self.allocations:
            raise ArgumentError(f"task {task_id} already holds resources")
        if not self.fits(cpu_cores, gpus):
            raise CapacityError(
                f"task {task_id} wants ({cpu_cores} cpu, {gpus} gpu), "
                f"free ({self.free_cpu} cpu, {self.free_gpu} gpu)"
            )
        self.free_cpu -= cpu_cores
        self.free_gpu -= gpus
        self.allocations[task_id] = (cpu_cores, gpus)

    def release(self, task_id: str) -> Tuple[int, int]:
        cpu, gpu = self.allocations.pop(task_id, (0, 0))
        self.free_cpu += cpu
        self.free_gpu += gpu
        return cpu, gpu

    def busy(self) -> Tuple[int, int]:
        return self.cpu_cores_total - self.free_cpu, self.gpus_total - self.free_gpu

    def conserved(self) -> bool:
        """allocated + free == total for both classes, and nothing oversubscribed"""
        cpu = sum(c for c, _ in self.allocations.values())
        gpu = sum(g for _, g in self.allocations.values())
        return (
            cpu + self.free_cpu == self.cpu_cores_total
            and gpu + self.free_gpu == self.gpus_total
            and 0 <= self.free_cpu <= self.cpu_cores_total
            and 0 <= self.free_gpu <= self.gpus_total
        )

    def __repr__(self) -> str:
        return (
            f"ResourcePool(cpu {self.free_cpu}/{self.cpu_cores_total} free, "
            f"gpu {self.free_gpu}/{self.gpus_total} free)"
        )
