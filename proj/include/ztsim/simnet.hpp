#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <set>
#include <string>

#include "ztsim/bytes.hpp"
#include "ztsim/result.hpp"

namespace ztsim::harness {

/// Deterministic message fabric for the harness actors. Messages are queued
/// per destination and delivered in (deliver_at, enqueue order); partitions
/// and drops lose messages but never forge or reorder them.
class SimNetwork {
 public:
  using Handler = std::function<Bytes(ByteView)>;

  void register_actor(const std::string& name, Handler handler) {
    actors_[name] = std::move(handler);
  }
  void remove_actor(const std::string& name) { actors_.erase(name); }
  bool has_actor(const std::string& name) const {
    return actors_.contains(name);
  }

  void partition(const std::string& a, const std::string& b) {
    cuts_.insert(edge(a, b));
  }
  void heal(const std::string& a, const std::string& b) {
    cuts_.erase(edge(a, b));
  }
  /// Silently drops the next `count` messages addressed to `to`.
  void drop_next(const std::string& to, std::size_t count) {
    drops_[to] += count;
  }

  /// Queues a one-way message for later delivery via step().
  void post(const std::string& from, const std::string& to, ByteView payload,
            std::uint64_t delay = 0);

  /// Delivers the next due message; returns false when the queue is empty.
  bool step();
  void run_until_idle() {
    while (step()) {
    }
  }
  std::size_t pending() const { return queue_.size(); }

  /// Synchronous request/response after draining anything already queued.
  Result<Bytes> request(const std::string& from, const std::string& to,
                        ByteView payload);

 private:
  struct Pending {
    std::uint64_t deliver_at;
    std::uint64_t seq;
    std::string to;
    Bytes payload;
  };

  static std::pair<std::string, std::string> edge(const std::string& a,
                                                  const std::string& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }
  bool deliverable(const std::string& from, const std::string& to) const {
    return !cuts_.contains(edge(from, to));
  }

  std::map<std::string, Handler> actors_;
  std::set<std::pair<std::string, std::string>> cuts_;
  std::map<std::string, std::size_t> drops_;
  std::deque<Pending> queue_;
  std::uint64_t now_ = 0;
  std::uint64_t seq_ = 0;
};

}  // namespace ztsim::harness
