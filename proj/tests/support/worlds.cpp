#include <random>
#include <string>
#include <vector>

#include "support/scenario.hpp"

namespace testsup {

namespace {

std::string join_with(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

iterag::corpus::Document doc(std::string id, std::string title, std::string text) {
    iterag::corpus::Document d;
    d.doc_id = std::move(id);
    d.title = std::move(title);
    d.text = std::move(text);
    return d;
}

} // namespace

World demo_world() {
    World world;
    world.documents = {
        doc("d_paris", "Paris",
            "Paris is the capital and largest city of France. The Eiffel Tower stands on the "
            "Champ de Mars."),
        doc("d_berlin", "Berlin",
            "Berlin is the capital of Germany and its largest city by population."),
        doc("d_seine", "Seine",
            "The Seine flows through central Paris toward the English Channel."),
        doc("d_loire", "Loire", "The Loire is the longest river lying entirely within France."),
        doc("d_danube", "Danube",
            "The Danube is a river that touches several European capital cities."),
        doc("d_thames", "Thames",
            "The Thames is a river passing through the capital of England."),
        doc("d_tokyo", "Tokyo", "Tokyo is the capital of Japan and a major economic center."),
        doc("d_madrid", "Madrid", "Madrid is the capital of Spain, known for its royal museums."),
        doc("d_alps", "Alps", "The Alps are a mountain range spanning several European countries."),
        doc("d_louvre", "Louvre",
            "The Louvre in Paris is the most visited art museum in the world."),
    };

    QuestionSpec river;
    river.question = "Which river flows through the capital of France?";
    river.initial_subqueries = {"What is the capital of France?",
                                "Which river is connected to that capital?"};
    river.hops = {
        Hop{"the capital of France",
            {"d_paris"},
            {"What is the capital of France?"},
            "capital of France",
            "capital of France"},
        Hop{"the river flowing through Paris",
            {"d_seine"},
            {"Which river flows through Paris?"},
            "Which river flows through Paris?",
            "Which river flows through Paris?"},
    };
    river.supportive_evidence = {{"d_paris", "Paris is the capital of France"},
                                 {"d_seine", "the Seine flows through Paris"}};
    river.contextual_docs = {"d_louvre"};
    river.final_answer = "The Seine";

    QuestionSpec germany;
    germany.question = "What is the capital of Germany?";
    germany.initial_subqueries = {"What is the capital of Germany?"};
    germany.hops = {Hop{"the capital of Germany",
                        {"d_berlin"},
                        {"What is the capital of Germany?"},
                        "capital of Germany",
                        "capital of Germany"}};
    germany.supportive_evidence = {{"d_berlin", "Berlin is the capital of Germany"}};
    germany.final_answer = "Berlin";

    QuestionSpec atlantis;
    atlantis.question = "What is the capital of Atlantis?";
    atlantis.initial_subqueries = {"What is the capital of Atlantis?"};
    atlantis.hops = {Hop{"any record of Atlantis",
                         {"d_atlantis"},
                         {"What is the capital of Atlantis?"},
                         "Atlantis capital historical records",
                         "Atlantis capital historical records"}};
    atlantis.final_answer = "unknown";
    atlantis.answerable_at_cap = false;

    world.questions = {river, germany, atlantis};
    return world;
}

std::vector<iterag::eval::QAInstance> demo_dataset() {
    using iterag::eval::QaTaskKind;
    return {
        {"demo_river", "Which river flows through the capital of France?",
         {"the Seine", "Seine"}, QaTaskKind::MultiHop},
        {"demo_berlin", "What is the capital of Germany?", {"Berlin"}, QaTaskKind::ShortForm},
        {"demo_atlantis", "What is the capital of Atlantis?", {"unknown"}, QaTaskKind::ShortForm},
    };
}

World multihop_world() {
    World world;
    world.documents = {
        doc("d_m1", "Aurelian workshop",
            "The Aurelian workshop was founded by Tobias Renn in the city of Valdria."),
        doc("d_m2", "Glass harmonium",
            "In Valdria, Tobias Renn crafted a glass harmonium for the guild concerts."),
        doc("trap_1", "Renn family trade",
            "The Renn family built many instruments, and instrument dealers in Valdria praised "
            "each instrument they sold."),
        doc("trap_2", "Instrument market",
            "Valdria instrument stalls sold instrument cases and instrument strings built on "
            "the Renn estate."),
        doc("trap_3", "Sales ledgers",
            "Old ledgers list instrument sales built around Valdria commissions, from "
            "instrument repairs to instrument tuning by Renn cousins."),
        doc("fill_1", "Guild charter",
            "The guild charter of Valdria set rules for every member workshop."),
        doc("fill_2", "City history", "Valdria grew from a river crossing into a walled trading city."),
        doc("d_s1", "Guild council", "The Brivane hall is the seat of the Valdrian guild council."),
        doc("fill_3", "Council minutes",
            "Council minutes record debates over guild seat allocation."),
        doc("fill_4", "Trade routes", "Caravan routes connected Valdria to the coastal towns."),
    };

    QuestionSpec craft;
    craft.question = "What instrument did the founder of the Aurelian workshop craft in Valdria?";
    craft.initial_subqueries = {"Who founded the Aurelian workshop?",
                                "What instrument was built at the Valdria workshop?"};
    craft.hops = {
        Hop{"the founder of the Aurelian workshop",
            {"d_m1"},
            {"Who founded the Aurelian workshop?"},
            "founder of the Aurelian workshop",
            "founder of the Aurelian workshop"},
        Hop{"the instrument the founder crafted in Valdria",
            {"d_m2"},
            {"What instrument was built at the Valdria workshop?"},
            "What instrument was built in Valdria?",
            "What glass instrument did Tobias Renn craft in Valdria?"},
    };
    craft.supportive_evidence = {{"d_m1", "Tobias Renn"},
                                 {"d_m2", "a glass harmonium crafted by Tobias Renn"}};
    craft.final_answer = "A glass harmonium crafted by Tobias Renn";

    QuestionSpec seat;
    seat.question = "Where does the Valdrian guild council sit?";
    seat.initial_subqueries = {"Where does the Valdrian guild council sit?"};
    seat.hops = {Hop{"the seat of the Valdrian guild council",
                     {"d_s1"},
                     {"Where does the Valdrian guild council sit?"},
                     "seat of the Valdrian guild council",
                     "seat of the Valdrian guild council"}};
    seat.supportive_evidence = {{"d_s1", "the Brivane hall"}};
    seat.final_answer = "The Brivane hall";

    world.questions = {craft, seat};
    return world;
}

std::vector<iterag::eval::QAInstance> multihop_dataset() {
    using iterag::eval::QaTaskKind;
    return {
        {"mh_craft", "What instrument did the founder of the Aurelian workshop craft in Valdria?",
         {"glass harmonium crafted by Tobias Renn"}, QaTaskKind::MultiHop},
        {"mh_seat", "Where does the Valdrian guild council sit?", {"Brivane hall"},
         QaTaskKind::ShortForm},
    };
}

namespace {

QuestionSpec curve_question(const std::string& prefix, World& world) {
    struct Stage {
        int supportive;
        int filler;
    };
    // Pool profile per iteration: sizes 3,6,9,12,15 with 1,3,6,9,12 supportive.
    const std::vector<Stage> stages = {{1, 2}, {2, 1}, {3, 0}, {3, 0}, {3, 0}};

    QuestionSpec spec;
    spec.question = "How did the " + prefix + " expedition chart its five survey stages?";
    spec.final_answer = "The " + prefix + " expedition charted all five stages.";

    for (std::size_t s = 0; s < stages.size(); ++s) {
        const std::string stage_no = std::to_string(s + 1);
        const std::string key = prefix + "stage" + stage_no;
        const std::string probe = key + " report";
        Hop hop;
        hop.name = prefix + " stage " + stage_no;
        hop.subqueries = {probe};
        hop.naive_probe = probe;
        hop.refined_probe = probe;
        for (int i = 0; i < stages[s].supportive; ++i) {
            const std::string id = prefix + "_s" + stage_no + static_cast<char>('a' + i);
            hop.required_docs.push_back(id);
            spec.supportive_evidence[id] = prefix + " stage " + stage_no + " finding " +
                                           std::to_string(i + 1);
            world.documents.push_back(doc(
                id, "", "Entry " + key + " confirms " + spec.supportive_evidence[id] + "."));
        }
        for (int i = 0; i < stages[s].filler; ++i) {
            const std::string id = prefix + "_f" + stage_no + static_cast<char>('a' + i);
            world.documents.push_back(
                doc(id, "", "Entry " + key + " lists supply counts unrelated to the survey."));
        }
        spec.hops.push_back(hop);
    }
    spec.initial_subqueries = {prefix + "stage1 report"};
    return spec;
}

} // namespace

World curve_world() {
    World world;
    world.questions.push_back(curve_question("ruby", world));
    world.questions.push_back(curve_question("onyx", world));
    return world;
}

std::vector<iterag::eval::QAInstance> curve_dataset() {
    using iterag::eval::QaTaskKind;
    return {
        {"curve_ruby", "How did the ruby expedition chart its five survey stages?",
         {"all five stages"}, QaTaskKind::LongForm},
        {"curve_onyx", "How did the onyx expedition chart its five survey stages?",
         {"all five stages"}, QaTaskKind::LongForm},
    };
}

World noise_world() {
    World world;
    world.documents = {
        doc("feld_s", "Feldmar lagoon",
            "The Feldmar lagoon owes its green tint to olivine silt."),
        doc("feld_f1", "Lagoon crossings", "Boats cross the Feldmar lagoon at dawn."),
        doc("feld_f2", "Regatta", "The Feldmar lagoon hosts a rowing regatta."),
        doc("feld_f3", "Autumn fog", "Fog settles over the Feldmar lagoon in autumn."),
        doc("feld_f4", "Shore path", "The Feldmar lagoon shoreline path loops past tall reeds."),
        doc("veyra_s", "Veyra comet",
            "Astronomer Ilsa Morrow first described the twin tail of the Veyra comet."),
        doc("veyra_f1", "Return period", "The Veyra comet returns every ninety years."),
        doc("veyra_f2", "Sky watchers", "Sky watchers traced the Veyra comet across the ridge."),
        doc("veyra_f3", "Brightness", "The Veyra comet appears brightest after dusk."),
        doc("veyra_f4", "Star charts", "Charts mark the Veyra comet near the pole star."),
    };
    const char* fillers[] = {"one", "two", "three", "four", "five",
                             "six", "seven", "eight", "nine", "ten"};
    for (int i = 0; i < 10; ++i) {
        world.documents.push_back(doc("pad_" + std::string(1, static_cast<char>('a' + i)), "",
                                      "Archive shelf " + std::string(fillers[i]) +
                                          " holds bound inventory ledgers."));
    }

    QuestionSpec lagoon;
    lagoon.question = "What mineral tints the Feldmar lagoon green?";
    lagoon.initial_subqueries = {"feldmar lagoon tint mineral"};
    lagoon.hops = {Hop{"the mineral tinting the Feldmar lagoon",
                       {"feld_s"},
                       {"feldmar lagoon tint mineral"},
                       "feldmar lagoon olivine",
                       "feldmar lagoon olivine"}};
    lagoon.supportive_evidence = {{"feld_s", "olivine silt"}};
    lagoon.final_answer = "Olivine silt";

    QuestionSpec comet;
    comet.question = "Which astronomer first described the twin tail of the Veyra comet?";
    comet.initial_subqueries = {"veyra comet twin tail astronomer"};
    comet.hops = {Hop{"the astronomer who described the twin tail",
                      {"veyra_s"},
                      {"veyra comet twin tail astronomer"},
                      "veyra comet astronomer records",
                      "veyra comet astronomer records"}};
    comet.supportive_evidence = {{"veyra_s", "Ilsa Morrow"}};
    comet.final_answer = "Ilsa Morrow";

    world.questions = {lagoon, comet};
    return world;
}

std::vector<iterag::eval::QAInstance> noise_dataset() {
    using iterag::eval::QaTaskKind;
    return {
        {"noise_lagoon", "What mineral tints the Feldmar lagoon green?", {"olivine silt"},
         QaTaskKind::ShortForm},
        {"noise_comet", "Which astronomer first described the twin tail of the Veyra comet?",
         {"Ilsa Morrow"}, QaTaskKind::ShortForm},
    };
}

World abstention_world() {
    World world;
    world.documents = {
        doc("marrow_1", "Marrow Point light",
            "The Marrow Point light guided ships past the shoals."),
        doc("marrow_2", "The keeper", "A keeper tended the Marrow Point light for forty years."),
        doc("marrow_3", "Winter storms", "Storms battered Marrow Point every winter."),
        doc("marrow_4", "Song festival", "The Marrow Point song festival draws summer crowds."),
        doc("gilt_restorer", "Restoration",
            "Sculptor Mira Voss restored the Gilt Fountain after the flood."),
        doc("gilt_1", "Old square", "The Gilt Fountain anchors the old market square."),
        doc("gilt_2", "Fountain coins", "Coins from the Gilt Fountain fund the orphan school."),
    };

    QuestionSpec song;
    song.question = "What song did the keeper of the Marrow Point light compose?";
    song.initial_subqueries = {"marrow point keeper song"};
    song.hops = {Hop{"the keeper's composition",
                     {"marrow_song"},
                     {"marrow point keeper song"},
                     "marrow point keeper composition records",
                     "marrow point keeper composition records"}};
    song.final_answer = "unknown";
    song.answerable_at_cap = false;

    QuestionSpec fountain;
    fountain.question = "Who restored the Gilt Fountain and in which year?";
    fountain.initial_subqueries = {"Who restored the Gilt Fountain?",
                                   "In which year was the Gilt Fountain restored?"};
    fountain.hops = {
        Hop{"who restored the Gilt Fountain",
            {"gilt_restorer"},
            {"Who restored the Gilt Fountain?"},
            "gilt fountain restorer",
            "gilt fountain restorer"},
        Hop{"the year of the restoration",
            {"gilt_year"},
            {"In which year was the Gilt Fountain restored?"},
            "gilt fountain restoration year records",
            "gilt fountain restoration year records"},
    };
    fountain.supportive_evidence = {{"gilt_restorer", "Mira Voss"}};
    fountain.final_answer = "Mira Voss restored the Gilt Fountain.";
    fountain.answerable_at_cap = true;

    world.questions = {song, fountain};
    return world;
}

World random_world(std::mt19937_64& rng, int index) {
    World world;
    const std::string p = "rw" + std::to_string(index);
    auto coin = [&rng](double prob) {
        return std::uniform_real_distribution<double>(0.0, 1.0)(rng) < prob;
    };

    const int hop_count = std::uniform_int_distribution<int>(1, 3)(rng);
    const bool unanswerable = coin(0.25);

    QuestionSpec spec;
    spec.question = "What chain of findings does the " + p + " inquiry establish?";
    spec.answerable_at_cap = coin(0.5);

    std::vector<std::string> final_parts;
    for (int h = 1; h <= hop_count; ++h) {
        const std::string key = p + "key" + std::to_string(h);
        Hop hop;
        hop.name = "finding " + std::to_string(h) + " of " + p;
        hop.naive_probe = key + " probe";
        hop.refined_probe = key + " probe";
        hop.subqueries = {hop.naive_probe};

        const int required = coin(0.35) ? 2 : 1;
        const bool drop_docs = unanswerable && h == hop_count;
        int stage_docs = 0;
        for (int r = 0; r < required; ++r) {
            const std::string id = p + "s" + std::to_string(h) + static_cast<char>('a' + r);
            hop.required_docs.push_back(id);
            spec.supportive_evidence[id] =
                p + "fact" + std::to_string(h) + static_cast<char>('a' + r);
            if (!drop_docs) {
                world.documents.push_back(
                    doc(id, "", "Record " + key + " confirms " + spec.supportive_evidence[id] + "."));
                ++stage_docs;
            }
        }
        while (stage_docs < 3 && coin(0.5)) {
            const std::string id = p + "x" + std::to_string(h) + std::to_string(stage_docs);
            if (coin(0.3)) {
                spec.contextual_docs.insert(id);
                world.documents.push_back(doc(id, "", "Note " + key + " gives background detail."));
            } else {
                world.documents.push_back(
                    doc(id, "", "Note " + key + " covers an unrelated supply matter."));
            }
            ++stage_docs;
        }
        final_parts.push_back(spec.supportive_evidence[hop.required_docs.front()]);
        spec.hops.push_back(hop);
    }

    spec.initial_subqueries = {spec.hops.front().naive_probe};
    if (hop_count >= 2 && coin(0.3)) spec.initial_subqueries.push_back(spec.hops[1].naive_probe);
    spec.final_answer = "The inquiry establishes " + join_with(final_parts, " then ") + ".";

    const char* shelves[] = {"one", "two", "three", "four", "five", "six"};
    for (int b = 0; b < 6; ++b) {
        world.documents.push_back(doc(p + "bg" + std::to_string(b + 1), "",
                                      "Unrelated archive material, shelf " +
                                          std::string(shelves[b]) + "."));
    }
    world.questions.push_back(spec);
    return world;
}

} // namespace testsup
