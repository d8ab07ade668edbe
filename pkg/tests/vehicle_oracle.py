"""Independent route-cost oracle: a literal vehicle simulation.

Deliberately written as a position/stock state machine rather than the
restock-counting arithmetic used by the package, so the two can check
each other.  Rules of the road: the vehicle leaves the depot full, dumps
as much stock as it can at each stop, shuttles back and forth while the
stop still wants more, and heads home once it runs completely dry or the
route ends.
"""


def simulate_cost(inst, partition) -> float:
    total = 0.0
    for route in partition:
        total += _drive_route(route, inst)
    return total


def _drive_route(route, inst) -> float:
    costs = inst.costs
    capacity = inst.capacity
    total = 0.0
    position = 0
    stock = capacity
    for stop_number, location in enumerate(route):
        total += costs[position][location]
        position = location
        wanted = inst.packages[location - 1]
        delivered = min(stock, wanted)
        stock -= delivered
        wanted -= delivered
        while wanted > 0:
            total += costs[location][0] + costs[0][location]
            stock = capacity
            delivered = min(stock, wanted)
            stock -= delivered
            wanted -= delivered
        ran_dry = stock == 0
        last_stop = stop_number == len(route) - 1
        if ran_dry and not last_stop:
            total += costs[location][0]
            position = 0
            stock = capacity
    total += costs[position][0]
    return total
