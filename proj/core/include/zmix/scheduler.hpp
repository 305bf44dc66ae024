#pragma once

#include <zmix/types.hpp>

#include <functional>
#include <queue>
#include <vector>

namespace zmix {

/// Single-threaded discrete-event queue. Events with equal time fire in the
/// order they were scheduled.
class Scheduler {
public:
    using Action = std::function<void()>;

    Tick now() const { return now_; }

    /// Throws Error(SchedulingInPast) when at < now().
    void schedule(Tick at, Action action);
    void schedule_after(Tick delay, Action action) { schedule(now_ + delay, std::move(action)); }

    /// Fires the earliest pending event. Returns false when the queue is empty.
    bool step();

    void run();

    /// Fires every event with time <= t, then moves the clock to t.
    void run_until(Tick t);

    bool dispatching() const { return dispatching_; }
    std::size_t pending() const { return queue_.size(); }
    std::uint64_t fired() const { return fired_; }

private:
    struct Entry {
        Tick at;
        std::uint64_t seq;
        Action action;
    };
    struct Later {
        bool operator()(const Entry& a, const Entry& b) const {
            return a.at != b.at ? a.at > b.at : a.seq > b.seq;
        }
    };

    std::priority_queue<Entry, std::vector<Entry>, Later> queue_;
    Tick now_ = 0;
    std::uint64_t next_seq_ = 0;
    std::uint64_t fired_ = 0;
    bool dispatching_ = false;
};

} // namespace zmix
