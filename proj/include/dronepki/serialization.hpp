#pragma once

// JSON forms of the domain types. Binary fields are lowercase hex. Field
// order is fixed (insertion-ordered JSON) so dumps are byte-stable.

#include <json.hpp>

#include "dronepki/crypto.hpp"
#include "dronepki/model.hpp"

namespace dpki {

using Json = nlohmann::ordered_json;

void to_json(Json& j, const Digest& d);
void from_json(const Json& j, Digest& d);
void to_json(Json& j, const PublicKey& k);
void from_json(const Json& j, PublicKey& k);
void to_json(Json& j, const Signature& s);
void from_json(const Json& j, Signature& s);
void to_json(Json& j, const SealedEnvelope& e);
void from_json(const Json& j, SealedEnvelope& e);
void to_json(Json& j, const Transaction& tx);
void from_json(const Json& j, Transaction& tx);
void to_json(Json& j, const BlockHeader& h);
void from_json(const Json& j, BlockHeader& h);
void to_json(Json& j, const BlockBody& b);
void from_json(const Json& j, BlockBody& b);
void to_json(Json& j, const Approval& a);
void from_json(const Json& j, Approval& a);
void to_json(Json& j, const BlockFooter& f);
void from_json(const Json& j, BlockFooter& f);
void to_json(Json& j, const Block& b);
void from_json(const Json& j, Block& b);
void to_json(Json& j, const HandshakeRecord& r);
void from_json(const Json& j, HandshakeRecord& r);
void to_json(Json& j, const ChallengeTranscript& t);
void from_json(const Json& j, ChallengeTranscript& t);

Json hex_json(ByteView bytes);
Bytes bytes_from_json(const Json& j);

}  // namespace dpki
