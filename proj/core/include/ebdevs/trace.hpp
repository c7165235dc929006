#pragma once

#include <ostream>
#include <string_view>

#include "ebdevs/time.hpp"

namespace ebdevs {

struct TraceEvent {
    SimTime time;
    std::string_view model;
    bool internal = true;  // false: external transition
    bool yup = false;      // model emitted an upward-causation value
};

class TraceSink {
public:
    virtual ~TraceSink() = default;
    virtual void on_event(const TraceEvent& ev) = 0;
};

// Tab-separated event log: time, model, INT|EXT, y_up flag. One line per
// transition.
class OstreamTraceSink final : public TraceSink {
public:
    explicit OstreamTraceSink(std::ostream& os) : os_(os) {}
    void on_event(const TraceEvent& ev) override;

private:
    std::ostream& os_;
};

}  // namespace ebdevs
