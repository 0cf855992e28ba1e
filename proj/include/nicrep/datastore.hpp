#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>

#include "nicrep/messages.hpp"
#include "nicrep/types.hpp"

namespace nicrep {

/// Deterministic pre-populated key space 0..key_count-1, generated once and
/// shared read-only between every host in a simulation. Initial values carry
/// timestamp (0, 0), older than any write.
class InitialPopulation {
public:
    InitialPopulation(std::size_t key_count, std::size_t value_size, std::uint64_t seed);

    std::size_t key_count() const { return key_count_; }
    std::size_t value_size() const { return value_size_; }
    std::optional<std::string_view> value(Key key) const;

private:
    std::size_t key_count_;
    std::size_t value_size_;
    std::string bytes_;
};

/// Storage behind the host-side datastore interface.
class DatastoreBackend {
public:
    virtual ~DatastoreBackend() = default;
    virtual std::optional<VersionedValue> get(Key key) const = 0;
    /// Applies writes in order; atomic with respect to later get() calls.
    virtual void apply_batch(std::span<const BatchEntry> writes) = 0;
    virtual std::size_t size() const = 0;
};

class InMemoryBackend final : public DatastoreBackend {
public:
    explicit InMemoryBackend(std::shared_ptr<const InitialPopulation> base);

    std::optional<VersionedValue> get(Key key) const override;
    void apply_batch(std::span<const BatchEntry> writes) override;
    std::size_t size() const override;

private:
    std::shared_ptr<const InitialPopulation> base_;
    std::unordered_map<Key, VersionedValue> written_;
    std::size_t extra_keys_ = 0;  // written keys outside the base population
};

std::unique_ptr<DatastoreBackend> make_in_memory_backend(std::size_t key_count, std::size_t value_size,
                                                         std::uint64_t seed);
std::unique_ptr<DatastoreBackend> make_backend(std::string_view name,
                                               std::shared_ptr<const InitialPopulation> base);

/// Host-side adapter between the NIC's PCIe traffic and a backend.
class DatastoreInterface {
public:
    explicit DatastoreInterface(std::unique_ptr<DatastoreBackend> backend);

    /// Applies one batch. Indices must be strictly increasing and above the last
    /// applied index; otherwise nothing is applied and the ack is marked rejected.
    DurableAck apply_batch(const WriteBatch& batch);
    std::optional<VersionedValue> fetch(Key key) const;

    std::optional<LogIndex> last_applied() const { return last_applied_; }
    const DatastoreBackend& backend() const { return *backend_; }

private:
    std::unique_ptr<DatastoreBackend> backend_;
    std::optional<LogIndex> last_applied_;
};

}  // namespace nicrep
