#pragma once

#include <array>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace favd {

// Coarse part-of-speech classes used by the corpus statistics.
enum class PosTag { adj, noun, prep, other };

// Maps one lowercased token to a coarse tag. Implementations must be
// deterministic and safe for concurrent read-only use.
class PosTagger {
 public:
  virtual ~PosTagger() = default;
  virtual std::string name() const = 0;
  virtual PosTag tag(std::string_view token) const = 0;
};

namespace lexicon {

// Small offline tables covering the vocabulary of everyday audible-video
// descriptions. Nouns are singular; plurals are resolved by suffix stripping.
inline constexpr std::array kNouns = {
    "man", "woman", "person", "people", "child", "children", "boy", "girl", "baby", "men",
    "women", "player", "singer", "dancer", "driver", "crowd", "audience", "teacher", "student",
    "worker", "chef", "musician", "drummer", "guitarist", "pianist", "host", "speaker",
    "dog", "cat", "bird", "horse", "cow", "sheep", "pig", "chicken", "duck", "goose", "fish",
    "lion", "tiger", "elephant", "monkey", "bear", "rabbit", "frog", "insect", "bee", "puppy",
    "kitten", "parrot", "owl", "crow", "goat", "deer", "wolf", "fox", "mouse", "snake",
    "car", "truck", "bus", "train", "bicycle", "bike", "motorcycle", "boat", "ship", "plane",
    "airplane", "helicopter", "vehicle", "tractor", "engine", "wheel", "tire", "road", "street",
    "drum", "guitar", "piano", "violin", "flute", "trumpet", "saxophone", "instrument", "keyboard",
    "microphone", "speaker", "amplifier", "bell", "whistle", "horn", "siren", "alarm", "clock",
    "song", "music", "melody", "rhythm", "voice", "sound", "noise", "laughter", "applause",
    "footstep", "wind", "rain", "thunder", "water", "wave", "river", "lake", "sea", "ocean",
    "stream", "waterfall", "fire", "smoke", "snow", "ice", "sky", "cloud", "sun", "moon",
    "tree", "grass", "flower", "leaf", "leaves", "forest", "field", "garden", "mountain", "hill",
    "rock", "stone", "sand", "beach", "park", "yard", "farm", "city", "building", "house",
    "room", "kitchen", "stage", "studio", "hall", "classroom", "office", "shop", "store",
    "restaurant", "window", "door", "wall", "floor", "ceiling", "roof", "stair", "table",
    "chair", "sofa", "bed", "desk", "shelf", "lamp", "light", "screen", "television", "computer",
    "phone", "camera", "picture", "painting", "poster", "sign", "board", "book", "paper", "pen",
    "cup", "bowl", "plate", "pot", "pan", "knife", "spoon", "fork", "bottle", "glass", "box",
    "bag", "basket", "toy", "ball", "balloon", "kite", "rope", "stick", "tool", "hammer", "saw",
    "machine", "fan", "hat", "cap", "shirt", "jacket", "coat", "dress", "skirt", "trousers",
    "pants", "shoe", "boot", "glove", "scarf", "glasses", "hair", "head", "face", "eye", "ear",
    "mouth", "nose", "hand", "arm", "leg", "foot", "feet", "finger", "body", "back", "shoulder",
    "food", "meat", "bread", "cake", "fruit", "apple", "banana", "rice", "noodle", "egg",
    "dot", "stripe", "pattern", "line", "circle", "corner", "side", "center", "front",
    "background", "foreground", "scene", "video", "picture", "image", "screen", "edge",
    "game", "match", "team", "court", "goal", "net", "track", "race", "dance", "show",
    "performance", "concert", "party", "lesson", "speech", "conversation", "talk", "story",
    "bark", "chirp", "engine", "motor", "crash", "splash", "click", "knock", "ring", "buzz",
};

inline constexpr std::array kAdjectives = {
    "red", "blue", "green", "yellow", "black", "white", "gray", "grey", "brown", "orange",
    "purple", "pink", "golden", "silver", "dark", "bright", "light", "colorful", "big", "large",
    "small", "little", "tiny", "huge", "long", "short", "tall", "high", "low", "wide", "narrow",
    "thick", "thin", "fat", "old", "young", "new", "ancient", "modern", "beautiful", "pretty",
    "ugly", "clean", "dirty", "wet", "dry", "hot", "cold", "warm", "cool", "loud", "quiet",
    "soft", "hard", "gentle", "rough", "smooth", "sharp", "heavy", "fast", "slow", "quick",
    "happy", "sad", "angry", "calm", "busy", "empty", "full", "open", "closed", "round",
    "square", "flat", "deep", "shallow", "clear", "noisy", "rhythmic", "melodious", "crisp",
    "steady", "continuous", "intermittent", "rapid", "faint", "sharp", "low-pitched",
    "high-pitched", "wooden", "metal", "plastic", "glass", "striped", "spotted", "curly",
    "straight", "left", "right", "middle", "upper", "lower", "front", "rear", "several",
    "many", "few", "other", "another", "same", "different", "various", "whole", "main",
};

inline constexpr std::array kPrepositions = {
    "in", "on", "at", "by", "with", "without", "under", "over", "above", "below", "beneath",
    "behind", "beside", "besides", "between", "among", "near", "next", "to", "from", "into",
    "onto", "out", "of", "off", "through", "across", "along", "around", "against", "toward",
    "towards", "inside", "outside", "upon", "within", "before", "after", "during", "for",
    "about", "up", "down", "past", "beyond", "underneath", "via", "like",
};

// Irregular or invariant plural forms are listed directly in kNouns.
inline std::vector<std::string> singular_candidates(std::string_view w) {
  std::vector<std::string> out;
  const auto ends = [&](std::string_view suf) {
    return w.size() > suf.size() + 1 && w.substr(w.size() - suf.size()) == suf;
  };
  if (ends("ies")) out.push_back(std::string(w.substr(0, w.size() - 3)) + "y");
  if (ends("es")) out.emplace_back(w.substr(0, w.size() - 2));
  if (ends("s") && !ends("ss")) out.emplace_back(w.substr(0, w.size() - 1));
  return out;
}

}  // namespace lexicon

// Table-driven tagger. A word listed in several tables ("light", "front")
// resolves PREP first, then ADJ, then NOUN.
class LexiconTagger final : public PosTagger {
 public:
  LexiconTagger()
      : nouns_(lexicon::kNouns.begin(), lexicon::kNouns.end()),
        adjectives_(lexicon::kAdjectives.begin(), lexicon::kAdjectives.end()),
        prepositions_(lexicon::kPrepositions.begin(), lexicon::kPrepositions.end()) {}

  std::string name() const override { return "lexicon-v1"; }

  PosTag tag(std::string_view token) const override {
    const std::string w(token);
    if (prepositions_.contains(w)) return PosTag::prep;
    if (adjectives_.contains(w)) return PosTag::adj;
    if (is_noun(w)) return PosTag::noun;
    return PosTag::other;
  }

  bool is_noun(const std::string& w) const {
    if (nouns_.contains(w)) return true;
    for (const auto& s : lexicon::singular_candidates(w)) {
      if (nouns_.contains(s)) return true;
    }
    return false;
  }

 private:
  std::unordered_set<std::string> nouns_;
  std::unordered_set<std::string> adjectives_;
  std::unordered_set<std::string> prepositions_;
};

}  // namespace favd
