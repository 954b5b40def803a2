#pragma once

#include <deque>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "irec/types.hpp"

namespace irec {

enum class EventType { Originate, Accept, Reject, Submit, Propagate, Return, Register, Purge, Fastpath };

std::string_view event_name(EventType t);
/// Throws ParseError on unknown names.
EventType event_from_name(std::string_view name);

struct Event {
  Round round = 0;
  AsId as;
  EventType type = EventType::Accept;
  Digest digest;
  std::string detail;  // space-separated key=value pairs

  friend bool operator==(const Event&, const Event&) = default;
};

/// Extracts `key=` from an event detail; empty when absent.
std::string detail_field(std::string_view detail, std::string_view key);

/// Append-only log. Line format: round TAB as TAB EVENT TAB digest-hex TAB detail.
class EventLog {
 public:
  EventLog() = default;
  /// Streaming log: events are written to `sink` as they are added and not kept.
  explicit EventLog(std::ostream* sink) : sink_(sink) {}

  void add(Round round, AsId as, EventType type, const Digest& digest, std::string detail = {});

  const std::deque<Event>& events() const { return events_; }
  std::size_t size() const { return count_; }
  bool streamed() const { return sink_ != nullptr; }

  void write(std::ostream& out) const;
  static EventLog read(std::istream& in);
  /// Parses events one at a time without keeping them. Throws ParseError.
  static void scan(std::istream& in, const std::function<void(const Event&)>& visit);

 private:
  std::ostream* sink_ = nullptr;
  std::size_t count_ = 0;
  std::deque<Event> events_;
};

}  // namespace irec
