#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ghzkd/statevec.hpp"

namespace ghzkd {

using PartyId = int;

enum class MsgKind {
    AnnounceTransmission,
    ConfirmReception,
    CheckPositions,
    CheckBasis,
    CheckOutcome,
    DPrimePositions,
    DPrimeReveal,
    ErrorRateReport,
    // Never emitted by the protocol; exists as the negative control for the
    // information-leakage audit.
    StateAnnouncement,
};

const char* to_string(MsgKind kind);

// One classical-channel message. Payload fields are typed so the leakage
// audit can check, structurally, that no legitimate kind carries a state
// identity: only a StateAnnouncement ever sets state_label.
struct ClassicalMessage {
    PartyId sender = -1;
    PartyId sequence_owner = -1;
    MsgKind kind = MsgKind::AnnounceTransmission;
    PartyId counterparty = -1;             // transfer peer for announce/confirm
    std::vector<int> positions;
    std::vector<MeasurementBasis> bases;
    std::vector<std::uint8_t> bits;
    std::vector<double> rates;
    int state_label = -1;
};

struct Transcript {
    std::vector<ClassicalMessage> messages;

    void push(ClassicalMessage msg) { messages.push_back(std::move(msg)); }
    std::size_t size() const { return messages.size(); }

    std::size_t count(MsgKind kind) const;
};

// Line-delimited dump, one JSON object per message:
// sequence_owner, sender, kind, payload.
std::string to_jsonl(const Transcript& transcript);

// Every AnnounceTransmission is immediately followed by the matching
// ConfirmReception (impersonation guard).
bool transcript_wellformed(const Transcript& transcript);

}  // namespace ghzkd
