#include "dronepki/replay.hpp"

#include <istream>

#include "dronepki/serialization.hpp"
#include "dronepki/validator.hpp"

namespace dpki {

namespace {

void problem(ReplayReport& r, std::size_t line, const std::string& what) {
  ++r.discrepancies;
  r.problems.push_back("line " + std::to_string(line) + ": " + what);
}

}  // namespace

ReplayReport replay_trace(std::istream& in) {
  ReplayReport r;
  bool have_genesis = false;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    ++r.events;
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::exception& e) {
      problem(r, line, std::string("unparseable event: ") + e.what());
      continue;
    }
    const std::string event = j.value("event", "");
    try {
      if (event == "genesis") {
        r.ledger = Ledger(j.at("validators").get<std::vector<PublicKey>>());
        have_genesis = true;
      } else if (!have_genesis) {
        if (event == "commit" || event == "evict") problem(r, line, event + " before genesis");
      } else if (event == "evict") {
        ++r.evictions;
        if (!r.ledger.remove_validator(j.at("validator").get<PublicKey>())) {
          problem(r, line, "evicted validator was not in the set");
        }
      } else if (event == "commit") {
        ++r.commits;
        const Block block = j.at("block").get<Block>();
        const auto transcript = j.at("transcript").get<ChallengeTranscript>();
        const auto proposer = j.at("proposer").get<PublicKey>();
        const bool recorded = j.at("oracle_valid").get<bool>();
        const Tick verified_at = j.at("verified_at").get<Tick>();
        const bool recomputed =
            verify_transcript(proposer, transaction_from(block.header.crt_type, block.body),
                              transcript, r.ledger, verified_at) == RejectReason::None;
        if (recomputed != recorded) {
          problem(r, line, "oracle label " + std::string(recorded ? "valid" : "invalid") +
                               " does not match recomputation");
        }
        if (!recorded) ++r.invalid_commits;
        try {
          r.ledger.append(block);
        } catch (const Error& e) {
          problem(r, line, std::string("block rejected on append: ") + e.what());
        }
      }
    } catch (const Json::exception& e) {
      problem(r, line, std::string("malformed ") + event + " event: " + e.what());
    } catch (const Error& e) {
      problem(r, line, std::string("malformed ") + event + " event: " + e.what());
    }
  }
  if (!have_genesis) problem(r, line, "trace has no genesis event");
  r.chain = verify_chain(r.ledger);
  if (!r.chain.ok) problem(r, line, "rebuilt chain fails verification: " + r.chain.detail);
  return r;
}

}  // namespace dpki
