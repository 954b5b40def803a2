#include "irec/event_log.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>

#include "irec/error.hpp"

namespace irec {

namespace {

constexpr std::array<std::string_view, 9> kNames = {"ORIGINATE", "ACCEPT",   "REJECT",
                                                    "SUBMIT",    "PROPAGATE", "RETURN",
                                                    "REGISTER",  "PURGE",    "FASTPATH"};

}  // namespace

std::string_view event_name(EventType t) { return kNames[static_cast<std::size_t>(t)]; }

EventType event_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<EventType>(i);
  }
  throw Error(ErrorCode::ParseError, "unknown event '" + std::string(name) + "'");
}

std::string detail_field(std::string_view detail, std::string_view key) {
  std::size_t pos = 0;
  while (pos < detail.size()) {
    std::size_t end = detail.find(' ', pos);
    if (end == std::string_view::npos) end = detail.size();
    const std::string_view tok = detail.substr(pos, end - pos);
    if (tok.size() > key.size() && tok.substr(0, key.size()) == key && tok[key.size()] == '=') {
      return std::string(tok.substr(key.size() + 1));
    }
    pos = end + 1;
  }
  return {};
}

namespace {

void write_event(std::ostream& out, const Event& e) {
  out << e.round << '\t' << e.as.value << '\t' << event_name(e.type) << '\t' << to_hex(e.digest) << '\t'
      << e.detail << '\n';
}

}  // namespace

void EventLog::add(Round round, AsId as, EventType type, const Digest& digest, std::string detail) {
  ++count_;
  if (sink_) {
    write_event(*sink_, Event{round, as, type, digest, std::move(detail)});
  } else {
    events_.push_back({round, as, type, digest, std::move(detail)});
  }
}

void EventLog::write(std::ostream& out) const {
  for (const auto& e : events_) write_event(out, e);
}

void EventLog::scan(std::istream& in, const std::function<void(const Event&)>& visit) {
  std::string line;
  std::size_t lineno = 0;
  std::array<std::string, 5> f;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < 5; ++i) {
      const std::size_t tab = i < 4 ? line.find('\t', pos) : std::string::npos;
      if (i < 4 && tab == std::string::npos) throw ParseError(lineno, "expected 5 tab-separated fields");
      f[i] = line.substr(pos, tab == std::string::npos ? std::string::npos : tab - pos);
      pos = tab + 1;
    }
    Event e;
    try {
      e.round = static_cast<Round>(std::stoul(f[0]));
      e.as = AsId(std::stoull(f[1]));
      e.type = event_from_name(f[2]);
      e.digest = digest_from_hex(f[3]);
      e.detail = std::move(f[4]);
    } catch (const std::exception& ex) {
      throw ParseError(lineno, ex.what());
    }
    visit(e);
  }
}

EventLog EventLog::read(std::istream& in) {
  EventLog log;
  scan(in, [&](const Event& e) {
    log.events_.push_back(e);
    ++log.count_;
  });
  return log;
}

}  // namespace irec
