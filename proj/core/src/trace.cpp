#include "ebdevs/trace.hpp"

#include <charconv>

namespace ebdevs {

void OstreamTraceSink::on_event(const TraceEvent& ev) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, ev.time.value());
    os_.write(buf, p - buf);
    os_.put('\t');
    os_.write(ev.model.data(), static_cast<std::streamsize>(ev.model.size()));
    os_.put('\t');
    os_ << (ev.internal ? "INT" : "EXT");
    os_.put('\t');
    os_.put(ev.yup ? '1' : '0');
    os_.put('\n');
}

}  // namespace ebdevs
