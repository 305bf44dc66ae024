#include <zmix/scheduler.hpp>

#include <string>

namespace zmix {

void Scheduler::schedule(Tick at, Action action) {
    if (at < now_)
        throw Error(ErrorCode::SchedulingInPast,
                    "cannot schedule at tick " + std::to_string(at) + ", now is " + std::to_string(now_));
    queue_.push(Entry{at, next_seq_++, std::move(action)});
}

bool Scheduler::step() {
    if (queue_.empty()) return false;
    // priority_queue::top is const; the action is moved out before pop.
    Entry e = std::move(const_cast<Entry&>(queue_.top()));
    queue_.pop();
    now_ = e.at;
    ++fired_;
    dispatching_ = true;
    try {
        e.action();
    } catch (...) {
        dispatching_ = false;
        throw;
    }
    dispatching_ = false;
    return true;
}

void Scheduler::run() {
    while (step()) {
    }
}

void Scheduler::run_until(Tick t) {
    if (t < now_)
        throw Error(ErrorCode::SchedulingInPast,
                    "cannot advance to tick " + std::to_string(t) + ", now is " + std::to_string(now_));
    while (!queue_.empty() && queue_.top().at <= t) step();
    now_ = t;
}

} // namespace zmix
