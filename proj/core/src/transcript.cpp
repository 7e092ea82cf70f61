#include "ghzkd/transcript.hpp"

#include <algorithm>
#include <sstream>

#include <json.hpp>

namespace ghzkd {

const char* to_string(MsgKind kind) {
    switch (kind) {
        case MsgKind::AnnounceTransmission: return "announce_transmission";
        case MsgKind::ConfirmReception: return "confirm_reception";
        case MsgKind::CheckPositions: return "check_positions";
        case MsgKind::CheckBasis: return "check_basis";
        case MsgKind::CheckOutcome: return "check_outcome";
        case MsgKind::DPrimePositions: return "dprime_positions";
        case MsgKind::DPrimeReveal: return "dprime_reveal";
        case MsgKind::ErrorRateReport: return "error_rate_report";
        case MsgKind::StateAnnouncement: return "state_announcement";
    }
    return "unknown";
}

std::size_t Transcript::count(MsgKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(messages.begin(), messages.end(),
                      [kind](const ClassicalMessage& m) { return m.kind == kind; }));
}

std::string to_jsonl(const Transcript& transcript) {
    std::ostringstream out;
    for (const ClassicalMessage& m : transcript.messages) {
        nlohmann::json payload;
        if (m.counterparty >= 0) payload["counterparty"] = m.counterparty;
        if (!m.positions.empty()) payload["positions"] = m.positions;
        if (!m.bases.empty()) {
            std::vector<std::string> names;
            names.reserve(m.bases.size());
            for (MeasurementBasis b : m.bases) {
                names.emplace_back(b == MeasurementBasis::Z ? "z" : "x");
            }
            payload["bases"] = names;
        }
        if (!m.bits.empty()) payload["bits"] = m.bits;
        if (!m.rates.empty()) payload["rates"] = m.rates;
        if (m.state_label >= 0) payload["state_label"] = m.state_label;

        nlohmann::json line;
        line["sequence_owner"] = m.sequence_owner;
        line["sender"] = m.sender;
        line["kind"] = to_string(m.kind);
        line["payload"] = std::move(payload);
        out << line.dump() << '\n';
    }
    return out.str();
}

bool transcript_wellformed(const Transcript& transcript) {
    const auto& msgs = transcript.messages;
    for (std::size_t i = 0; i < msgs.size(); ++i) {
        if (msgs[i].kind != MsgKind::AnnounceTransmission) continue;
        if (i + 1 >= msgs.size()) return false;
        const ClassicalMessage& confirm = msgs[i + 1];
        if (confirm.kind != MsgKind::ConfirmReception) return false;
        if (confirm.sender != msgs[i].counterparty) return false;
        if (confirm.counterparty != msgs[i].sender) return false;
        if (confirm.sequence_owner != msgs[i].sequence_owner) return false;
    }
    return true;
}

}  // namespace ghzkd
