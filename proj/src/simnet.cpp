#include "ztsim/simnet.hpp"

#include <algorithm>

namespace ztsim::harness {

void SimNetwork::post(const std::string& from, const std::string& to,
                      ByteView payload, std::uint64_t delay) {
  if (!deliverable(from, to)) return;  // partitioned links lose messages
  auto it = drops_.find(to);
  if (it != drops_.end() && it->second > 0) {
    --it->second;
    return;
  }
  queue_.push_back(Pending{now_ + delay, seq_++,
                           to, Bytes(payload.begin(), payload.end())});
}

bool SimNetwork::step() {
  if (queue_.empty()) return false;
  auto next = std::min_element(queue_.begin(), queue_.end(),
                               [](const Pending& a, const Pending& b) {
                                 return std::tie(a.deliver_at, a.seq) <
                                        std::tie(b.deliver_at, b.seq);
                               });
  Pending msg = std::move(*next);
  queue_.erase(next);
  now_ = std::max(now_, msg.deliver_at) + 1;
  auto actor = actors_.find(msg.to);
  if (actor != actors_.end() && actor->second) {
    actor->second(msg.payload);  // fire-and-forget delivery
  }
  return true;
}

Result<Bytes> SimNetwork::request(const std::string& from,
                                  const std::string& to, ByteView payload) {
  run_until_idle();
  if (!deliverable(from, to)) {
    return make_error(Errc::no_route, "network partition between " + from +
                                          " and " + to);
  }
  auto it = drops_.find(to);
  if (it != drops_.end() && it->second > 0) {
    --it->second;
    return make_error(Errc::no_route, "message to " + to + " dropped");
  }
  auto actor = actors_.find(to);
  if (actor == actors_.end() || !actor->second) {
    return make_error(Errc::no_route, "no such actor: " + to);
  }
  ++now_;
  return actor->second(payload);
}

}  // namespace ztsim::harness
