#include "nicrep/datastore.hpp"

#include <string>

namespace nicrep {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

constexpr std::string_view kAlphabet = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789";

}  // namespace

InitialPopulation::InitialPopulation(std::size_t key_count, std::size_t value_size, std::uint64_t seed)
    : key_count_(key_count), value_size_(value_size) {
    bytes_.resize(key_count_ * value_size_);
    std::uint64_t state = seed ^ 0x5EED0F1A1B2C3D4EULL;
    std::uint64_t word = 0;
    int left = 0;
    for (char& c : bytes_) {
        if (left == 0) {
            word = splitmix64(state);
            left = 8;
        }
        c = kAlphabet[(word & 0xFF) % kAlphabet.size()];
        word >>= 8;
        --left;
    }
}

std::optional<std::string_view> InitialPopulation::value(Key key) const {
    if (key >= key_count_) return std::nullopt;
    return std::string_view(bytes_).substr(static_cast<std::size_t>(key) * value_size_, value_size_);
}

InMemoryBackend::InMemoryBackend(std::shared_ptr<const InitialPopulation> base) : base_(std::move(base)) {}

std::optional<VersionedValue> InMemoryBackend::get(Key key) const {
    if (auto it = written_.find(key); it != written_.end()) return it->second;
    if (base_) {
        if (auto v = base_->value(key)) return VersionedValue{Value(*v), Timestamp{}};
    }
    return std::nullopt;
}

void InMemoryBackend::apply_batch(std::span<const BatchEntry> writes) {
    for (const auto& w : writes) {
        auto [it, inserted] = written_.insert_or_assign(w.key, VersionedValue{w.value, w.ts});
        if (inserted && !(base_ && w.key < base_->key_count())) ++extra_keys_;
    }
}

std::size_t InMemoryBackend::size() const {
    return (base_ ? base_->key_count() : 0) + extra_keys_;
}

std::unique_ptr<DatastoreBackend> make_in_memory_backend(std::size_t key_count, std::size_t value_size,
                                                         std::uint64_t seed) {
    return std::make_unique<InMemoryBackend>(std::make_shared<const InitialPopulation>(key_count, value_size, seed));
}

std::unique_ptr<DatastoreBackend> make_backend(std::string_view name, std::shared_ptr<const InitialPopulation> base) {
    if (name == "memory") return std::make_unique<InMemoryBackend>(std::move(base));
    throw ConfigError("unknown datastore backend '" + std::string(name) + "' (only 'memory' is available)");
}

DatastoreInterface::DatastoreInterface(std::unique_ptr<DatastoreBackend> backend) : backend_(std::move(backend)) {}

DurableAck DatastoreInterface::apply_batch(const WriteBatch& batch) {
    std::optional<LogIndex> prev = last_applied_;
    for (const auto& e : batch.entries) {
        if (prev && e.index <= *prev) return DurableAck{last_applied_.value_or(0), true};
        prev = e.index;
    }
    if (batch.entries.empty()) return DurableAck{last_applied_.value_or(0), true};
    backend_->apply_batch(batch.entries);
    last_applied_ = batch.entries.back().index;
    return DurableAck{*last_applied_, false};
}

std::optional<VersionedValue> DatastoreInterface::fetch(Key key) const {
    return backend_->get(key);
}

}  // namespace nicrep
