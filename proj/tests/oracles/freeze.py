"""Runs every oracle and writes tests/oracle_values.hpp.

Usage: python3 tests/oracles/freeze.py
"""
import json
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).resolve().parent
OUT = HERE.parent / "oracle_values.hpp"


def run(name):
    res = subprocess.run([sys.executable, str(HERE / name)], check=True, capture_output=True, text=True)
    return json.loads(res.stdout)


def lit(x):
    return repr(float(x))


def main():
    m = run("metrics_oracle.py")
    c = run("corpus_oracle.py")
    g = run("gompertz_oracle.py")
    h = run("hash_oracle.py")
    lines = [
        "#pragma once",
        "",
        "// Generated by tests/oracles/freeze.py. Do not edit by hand.",
        "",
        "#include <array>",
        "#include <cstdint>",
        "#include <string_view>",
        "",
        "namespace oracle {",
        "",
        "struct DocMetrics {",
        "  std::string_view id;",
        "  double bleu[4];",
        "  double rouge_l;",
        "  double cider;",
        "  double cider_identity;",
        "};",
        "",
        "inline constexpr std::array<DocMetrics, 3> kToyDocs = {{",
    ]
    for doc_id, d in sorted(m["per_doc"].items()):
        bleus = ", ".join(lit(d[f"bleu{n}"]) for n in range(1, 5))
        lines.append(f'    {{"{doc_id}", {{{bleus}}}, {lit(d["rougeL"])}, {lit(d["cider"])}, {lit(d["cider_identity"])}}},')
    lines.append("}};")
    cb = ", ".join(lit(m["corpus"][f"bleu{n}"]) for n in range(1, 5))
    lines.append(f"inline constexpr double kToyCorpusBleu[4] = {{{cb}}};")
    lines += [
        "",
        f"inline constexpr std::size_t kFixtureRecords = {c['records']};",
        f"inline constexpr std::size_t kFixtureTrain = {c['splits']['train']};",
        f"inline constexpr std::size_t kFixtureVal = {c['splits']['val']};",
        f"inline constexpr std::size_t kFixtureTest = {c['splits']['test']};",
        f"inline constexpr int kFixtureModelVocab = {c['model_vocab_size']};",
    ]
    for lang in ("en", "zh"):
        s = c[lang]
        L = lang.capitalize()
        lines += [
            f"inline constexpr std::size_t k{L}Clips = {s['clip_count']};",
            f"inline constexpr double k{L}AvgSentences = {lit(s['avg_sentences'])};",
            f"inline constexpr double k{L}AvgWords = {lit(s['avg_words'])};",
            f"inline constexpr std::size_t k{L}Vocabulary = {s['vocabulary_size']};",
            f"inline constexpr std::string_view k{L}TopWord = \"{s['top5'][0][0]}\";",
            f"inline constexpr std::size_t k{L}TopCount = {s['top5'][0][1]};",
        ]
    lines += [
        "",
        f"inline constexpr double kGompertzA = {lit(g['a'])};",
        f"inline constexpr double kGompertz0 = {lit(g['f0'])};",
        f"inline constexpr double kGompertz1 = {lit(g['f1'])};",
        f"inline constexpr double kGompertzHalf = {lit(g['f_half'])};",
        f"inline constexpr double kGompertzTenth = {lit(g['f_0p1'])};",
        f"inline constexpr double kAudioExampleS = {lit(g['s_example'])};",
        f"inline constexpr double kAudioExampleScore = {lit(g['score_example'])};",
        "",
        f"inline constexpr std::uint64_t kFnvHello = {h['fnv_hello']}ULL;",
        f"inline constexpr std::uint64_t kFnvEmpty = {h['fnv_empty']}ULL;",
        f"inline constexpr double kCosDogCat = {lit(h['cos_dog_cat'])};",
        f"inline constexpr double kCosGuitar = {lit(h['cos_guitar'])};",
        "",
        "struct EntityCase {",
        "  std::array<std::string_view, 3> pred;",
        "  std::array<std::string_view, 5> ref;",
        "  double recall, comprehensiveness, score;",
        "};",
        "",
        "inline constexpr std::array<EntityCase, 3> kEntityCases = {{",
    ]
    cases = [
        (["man", "guitar", "stage"], ["man", "guitar", "crowd", "light"], h["entity_1"]),
        (["dog", "field"], ["dog", "ball", "grass", "field", "tree"], h["entity_2"]),
        (["cat"], ["sofa", "lamp"], h["entity_3"]),
    ]
    for p, r, v in cases:
        ps = ", ".join(f'"{x}"' for x in p)
        rs = ", ".join(f'"{x}"' for x in r)
        lines.append(f"    {{{{{ps}}}, {{{rs}}}, {lit(v['recall'])}, {lit(v['comprehensiveness'])}, {lit(v['score'])}}},")
    lines += ["}};", "", "}  // namespace oracle", ""]
    OUT.write_text("\n".join(lines))
    print(f"wrote {OUT}")


if __name__ == "__main__":
    main()
