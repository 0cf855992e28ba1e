#include "nicrep/messages.hpp"

#include "nicrep/detail/overloaded.hpp"

namespace nicrep {

using detail::overloaded;

std::size_t WireSizes::of(const ProtocolMessage& msg) const {
    return std::visit(
        overloaded{
            [&](const Inv& m) { return kTag + key_bytes + kTimestamp + kIndex + m.value.size(); },
            [&](const Ack&) { return kTag + key_bytes + kTimestamp + kReplica; },
            [&](const Commit&) { return kTag + key_bytes + kTimestamp; },
        },
        msg);
}

std::size_t WireSizes::of(const PcieMessage& msg) const {
    return std::visit(
        overloaded{
            [&](const WriteBatch& b) {
                std::size_t bytes = 0;
                for (const auto& e : b.entries)
                    bytes += kIndex + key_bytes + kTimestamp + e.value.size();
                return bytes;
            },
            [&](const DurableAck&) { return kIndex; },
            [&](const FetchRequest&) { return key_bytes + kRequest; },
            [&](const FetchResponse& r) {
                std::size_t bytes = key_bytes + kRequest + kTag;
                if (r.result) bytes += kTimestamp + r.result->value.size();
                return bytes;
            },
        },
        msg);
}

}  // namespace nicrep
