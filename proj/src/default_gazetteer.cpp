#include "ehi/entities.hpp"

namespace ehi {

namespace {

// Kept byte-identical to data/gazetteer.tsv (checked by a unit test).
constexpr std::string_view kDefaultGazetteer = R"tsv(# Default gazetteer: surface<TAB>TYPE, one entry per line.
# Types: PERSON ORG LOC EVENT MISC
Alice	PERSON
Bob	PERSON
Carol	PERSON
David	PERSON
Erin	PERSON
Frank	PERSON
Grace	PERSON
Heidi	PERSON
Ivan	PERSON
Judy	PERSON
Mallory	PERSON
Oscar	PERSON
Peggy	PERSON
Trent	PERSON
Victor	PERSON
Walter	PERSON
Ondrej Bojar	PERSON
Naman Kabadi	PERSON
Oracle	ORG
Microsoft	ORG
IBM	ORG
Google	ORG
Amazon	ORG
Siemens	ORG
Acme	ORG
Acme Corp	ORG
Globex	ORG
Initech	ORG
Umbrella	ORG
Charles University	ORG
European Commission	ORG
United Nations	ORG
Prague	LOC
Berlin	LOC
Paris	LOC
London	LOC
Vienna	LOC
Brussels	LOC
Geneva	LOC
Asia	LOC
Europe	LOC
New York	LOC
Czech Republic	LOC
Interspeech	EVENT
Eurovision	EVENT
AutoMin	EVENT
Olympics	EVENT
Brexit	EVENT
World Cup	EVENT
Annual Review	EVENT
)tsv";

} // namespace

std::string_view default_gazetteer_text() noexcept { return kDefaultGazetteer; }

} // namespace ehi
