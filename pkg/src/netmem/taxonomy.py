"""Static lookup tables: science fields and their subfields, country-to-region
assignments, ccTLD and affiliation-keyword geolocation hints.

The subfield taxonomy is closed: a subfield resolves to exactly one field or
it is unknown. The country table assigns every UN member state (plus a few
widely used non-member ISO codes) to one of the eight world regions used for
cohort stratification.
"""

from __future__ import annotations

import re

from .model import FieldOfScience, Region

# Subfields per field. Lookup is exact up to case and whitespace collapsing.
FIELD_SUBFIELDS: dict[FieldOfScience, tuple[str, ...]] = {
    FieldOfScience.AGRICULTURE_FISHERIES_FORESTRY: (
        "Agronomy & Agriculture",
        "Dairy & Animal Science",
        "Fisheries",
        "Food Science",
        "Forestry",
        "Horticulture",
        "Veterinary Sciences",
    ),
    FieldOfScience.BUILT_ENVIRONMENT_DESIGN: (
        "Architecture",
        "Building & Construction",
        "Design Practice & Management",
        "Urban & Regional Planning",
    ),
    FieldOfScience.ENGINEERING: (
        "Aerospace & Aeronautics",
        "Automobile Design & Engineering",
        "Biomedical Engineering",
        "Chemical Engineering",
        "Civil Engineering",
        "Electrical & Electronic Engineering",
        "Environmental Engineering",
        "Geological & Geomatics Engineering",
        "Industrial Engineering & Automation",
        "Mechanical Engineering & Transports",
        "Mining & Metallurgy",
        "Operations Research",
    ),
    FieldOfScience.INFORMATION_COMMUNICATION_TECHNOLOGIES: (
        "Computation Theory & Mathematics",
        "Computer Hardware & Architecture",
        "Distributed Computing",
        "Image Processing",
        "Information Systems",
        "Medical Informatics",
        "Networking & Telecommunications",
        "Software Engineering",
    ),
    FieldOfScience.ECONOMICS_BUSINESS: (
        "Accounting",
        "Agricultural Economics & Policy",
        "Business & Management",
        "Development Studies",
        "Econometrics",
        "Economic Theory",
        "Economics",
        "Finance",
        "Industrial Relations",
        "Logistics & Transportation",
        "Sport, Leisure & Tourism",
    ),
    FieldOfScience.CLINICAL_MEDICINE: (
        "Allergy",
        "Anesthesiology",
        "Arthritis & Rheumatology",
        "Cardiovascular System & Hematology",
        "Complementary & Alternative Medicine",
        "Dentistry",
        "Dermatology & Venereal Diseases",
        "Emergency & Critical Care Medicine",
        "Endocrinology & Metabolism",
        "Environmental & Occupational Health",
        "Gastroenterology & Hepatology",
        "General & Internal Medicine",
        "General Clinical Medicine",
        "Geriatrics",
        "Legal & Forensic Medicine",
        "Neurology & Neurosurgery",
        "Obstetrics & Reproductive Medicine",
        "Ophthalmology & Optometry",
        "Orthopedics",
        "Otorhinolaryngology",
        "Pathology",
        "Pediatrics",
        "Pharmacology & Pharmacy",
        "Respiratory System",
        "Sport Sciences",
        "Surgery",
        "Tropical Medicine",
        "Urology & Nephrology",
    ),
    FieldOfScience.BIOLOGY: (
        "Entomology",
        "Evolutionary Biology",
        "Marine Biology & Hydrobiology",
        "Ornithology",
        "Plant Biology & Botany",
        "Zoology",
    ),
    FieldOfScience.EARTH_ENVIRONMENTAL_SCIENCES: (
        "Environmental Sciences",
        "Geochemistry & Geophysics",
        "Geology",
        "Meteorology & Atmospheric Sciences",
        "Oceanography",
        "Paleontology",
    ),
    FieldOfScience.MATHEMATICS_STATISTICS: (
        "Applied Mathematics",
        "General Mathematics",
        "Numerical & Computational Mathematics",
        "Statistics & Probability",
    ),
    FieldOfScience.PHYSICS_ASTRONOMY: (
        "Acoustics",
        "Applied Physics",
        "Astronomy & Astrophysics",
        "Chemical Physics",
        "Fluids & Plasmas",
        "General Physics",
        "Mathematical Physics",
        "Optics",
    ),
}


def _canon(text: str) -> str:
    return re.sub(r"\s+", " ", text.strip()).casefold()


_SUBFIELD_TO_FIELD: dict[str, FieldOfScience] = {
    _canon(sub): field
    for field, subs in FIELD_SUBFIELDS.items()
    for sub in subs
}


def field_for_subfield(subfield: str) -> FieldOfScience | None:
    """Resolve a subfield label to its field, or None if not in the taxonomy."""
    return _SUBFIELD_TO_FIELD.get(_canon(subfield))


def subfields_of(field: FieldOfScience) -> tuple[str, ...]:
    return FIELD_SUBFIELDS[field]


# ISO-3166 alpha-2 -> region, covering all UN member states. Conventions:
# Mexico, Central America and the Caribbean sit with South/Central America;
# Russia and Cyprus with Europe; the Caucasus, Turkey, Iran and Afghanistan
# with the Middle East; South and Central Asia fold into East/Southeast Asia
# (no separate bucket exists for them); Sudan and Egypt with North Africa.
COUNTRY_REGION: dict[str, Region] = {}

_REGION_COUNTRIES: dict[Region, str] = {
    Region.NORTH_AMERICA: "CA US",
    Region.SOUTH_CENTRAL_AMERICA: (
        "AG AR BB BO BR BS BZ CL CO CR CU DM DO EC GD GT GY HN HT JM KN LC "
        "MX NI PA PE PY SR SV TT UY VC VE"
    ),
    Region.EUROPE: (
        "AD AL AT BA BE BG BY CH CY CZ DE DK EE ES FI FR GB GR HR HU IE IS "
        "IT LI LT LU LV MC MD ME MK MT NL NO PL PT RO RS RU SE SI SK SM UA VA"
    ),
    Region.NORTH_AFRICA: "DZ EG LY MA SD TN",
    Region.SUB_SAHARAN_AFRICA: (
        "AO BF BI BJ BW CD CF CG CI CM CV DJ ER ET GA GH GM GN GQ GW KE KM "
        "LR LS MG ML MR MU MW MZ NA NE NG RW SC SL SN SO SS ST SZ TD TG TZ "
        "UG ZA ZM ZW"
    ),
    Region.MIDDLE_EAST: "AE AF AM AZ BH GE IL IQ IR JO KW LB OM PS QA SA SY TR YE",
    Region.EAST_SOUTHEAST_ASIA: (
        "BD BN BT CN HK ID IN JP KG KH KP KR KZ LA LK MM MN MO MV MY NP PH "
        "PK SG TH TJ TL TM TW UZ VN"
    ),
    Region.OCEANIC: "AU FJ FM KI MH NR NZ PG PW SB TO TV VU WS",
}

for _region, _codes in _REGION_COUNTRIES.items():
    for _code in _codes.split():
        COUNTRY_REGION[_code] = _region


def region_for_country(country: str) -> Region | None:
    return COUNTRY_REGION.get(country.strip().upper())


# ccTLD -> ISO country. Mostly the identity on the country table, with the
# usual exceptions and the US-centric legacy TLDs.
CCTLD_COUNTRY: dict[str, str] = {code.lower(): code for code in COUNTRY_REGION}
CCTLD_COUNTRY.update({"uk": "GB", "su": "RU", "edu": "US", "gov": "US", "mil": "US"})


def country_for_email_domain(domain: str) -> str | None:
    """Map an email domain to a country via its top-level label."""
    tail = domain.strip().lower().rstrip(".").rsplit(".", 1)[-1]
    return CCTLD_COUNTRY.get(tail)


# Affiliation keywords -> ISO country. Country names and common aliases plus
# a curated set of cities, US states and ambiguity-breaking institution names.
# Longest keyword wins; matching is on word boundaries, case-insensitive.
AFFILIATION_KEYWORDS: dict[str, str] = {
    # country names / aliases
    "united states of america": "US", "united states": "US", "usa": "US",
    "canada": "CA", "mexico": "MX", "brazil": "BR", "argentina": "AR",
    "chile": "CL", "colombia": "CO", "peru": "PE", "ecuador": "EC",
    "uruguay": "UY", "venezuela": "VE", "bolivia": "BO", "cuba": "CU",
    "costa rica": "CR", "panama": "PA", "guatemala": "GT", "jamaica": "JM",
    "united kingdom": "GB", "great britain": "GB", "england": "GB",
    "scotland": "GB", "wales": "GB", "northern ireland": "GB",
    "france": "FR", "germany": "DE", "italy": "IT", "spain": "ES",
    "portugal": "PT", "netherlands": "NL", "belgium": "BE",
    "switzerland": "CH", "austria": "AT", "sweden": "SE", "norway": "NO",
    "denmark": "DK", "finland": "FI", "iceland": "IS", "ireland": "IE",
    "poland": "PL", "czech republic": "CZ", "czechia": "CZ",
    "slovakia": "SK", "hungary": "HU", "romania": "RO", "bulgaria": "BG",
    "greece": "GR", "croatia": "HR", "serbia": "RS", "slovenia": "SI",
    "ukraine": "UA", "russia": "RU", "russian federation": "RU",
    "estonia": "EE", "latvia": "LV", "lithuania": "LT", "luxembourg": "LU",
    "cyprus": "CY", "malta": "MT", "turkey": "TR", "türkiye": "TR",
    "iran": "IR", "iraq": "IQ", "israel": "IL", "saudi arabia": "SA",
    "qatar": "QA", "kuwait": "KW", "bahrain": "BH", "oman": "OM",
    "united arab emirates": "AE", "jordan": "JO", "lebanon": "LB",
    "yemen": "YE", "syria": "SY", "armenia": "AM", "azerbaijan": "AZ",
    "afghanistan": "AF", "georgia": "GE",
    "egypt": "EG", "morocco": "MA", "algeria": "DZ", "tunisia": "TN",
    "libya": "LY", "sudan": "SD",
    "south africa": "ZA", "nigeria": "NG", "kenya": "KE", "ethiopia": "ET",
    "ghana": "GH", "tanzania": "TZ", "uganda": "UG", "senegal": "SN",
    "cameroon": "CM", "zimbabwe": "ZW", "zambia": "ZM", "botswana": "BW",
    "namibia": "NA", "rwanda": "RW", "mozambique": "MZ", "madagascar": "MG",
    "china": "CN", "japan": "JP", "south korea": "KR",
    "republic of korea": "KR", "korea": "KR", "taiwan": "TW",
    "hong kong": "HK", "mongolia": "MN", "india": "IN", "pakistan": "PK",
    "bangladesh": "BD", "sri lanka": "LK", "nepal": "NP",
    "indonesia": "ID", "malaysia": "MY", "singapore": "SG",
    "thailand": "TH", "vietnam": "VN", "viet nam": "VN",
    "philippines": "PH", "myanmar": "MM", "cambodia": "KH",
    "kazakhstan": "KZ", "uzbekistan": "UZ", "kyrgyzstan": "KG",
    "australia": "AU", "new zealand": "NZ", "fiji": "FJ",
    "papua new guinea": "PG",
    # US states (Georgia omitted: collides with the country; see institutions)
    "alabama": "US", "alaska": "US", "arizona": "US", "arkansas": "US",
    "california": "US", "colorado": "US", "connecticut": "US",
    "delaware": "US", "florida": "US", "hawaii": "US", "idaho": "US",
    "illinois": "US", "indiana": "US", "iowa": "US", "kansas": "US",
    "kentucky": "US", "louisiana": "US", "maine": "US", "maryland": "US",
    "massachusetts": "US", "michigan": "US", "minnesota": "US",
    "mississippi": "US", "missouri": "US", "montana": "US", "nebraska": "US",
    "nevada": "US", "new hampshire": "US", "new jersey": "US",
    "new mexico": "US", "new york": "US", "north carolina": "US",
    "north dakota": "US", "ohio": "US", "oklahoma": "US", "oregon": "US",
    "pennsylvania": "US", "rhode island": "US", "south carolina": "US",
    "south dakota": "US", "tennessee": "US", "texas": "US", "utah": "US",
    "vermont": "US", "virginia": "US", "washington": "US",
    "west virginia": "US", "wisconsin": "US", "wyoming": "US",
    # ambiguity breakers and well-known institutions
    "georgia institute of technology": "US", "georgia tech": "US",
    "university of georgia": "US", "georgia state university": "US",
    "mit": "US", "stanford": "US", "berkeley": "US", "caltech": "US",
    "princeton": "US", "harvard": "US", "yale": "US", "cornell": "US",
    "eth zurich": "CH", "epfl": "CH", "tsinghua": "CN", "peking": "CN",
    # cities ("cambridge" omitted: UK city vs Cambridge MA)
    "boston": "US", "chicago": "US", "seattle": "US", "houston": "US",
    "atlanta": "US", "philadelphia": "US", "pittsburgh": "US",
    "baltimore": "US", "los angeles": "US", "san francisco": "US",
    "san diego": "US", "ann arbor": "US", "ithaca": "US", "madison": "US",
    "austin": "US",
    "toronto": "CA", "vancouver": "CA", "montreal": "CA", "ottawa": "CA",
    "london": "GB", "edinburgh": "GB", "oxford": "GB", "manchester": "GB",
    "paris": "FR", "lyon": "FR", "berlin": "DE", "munich": "DE",
    "heidelberg": "DE", "zurich": "CH", "geneva": "CH", "vienna": "AT",
    "amsterdam": "NL", "delft": "NL", "stockholm": "SE", "uppsala": "SE",
    "oslo": "NO", "copenhagen": "DK", "helsinki": "FI", "dublin": "IE",
    "madrid": "ES", "barcelona": "ES", "rome": "IT", "milan": "IT",
    "lisbon": "PT", "moscow": "RU", "warsaw": "PL", "prague": "CZ",
    "budapest": "HU", "athens": "GR", "istanbul": "TR", "ankara": "TR",
    "tehran": "IR", "tel aviv": "IL", "jerusalem": "IL", "riyadh": "SA",
    "jeddah": "SA", "dubai": "AE", "abu dhabi": "AE", "doha": "QA",
    "amman": "JO", "beirut": "LB", "baghdad": "IQ",
    "cairo": "EG", "alexandria": "EG", "rabat": "MA", "casablanca": "MA",
    "tunis": "TN", "algiers": "DZ", "khartoum": "SD",
    "nairobi": "KE", "lagos": "NG", "ibadan": "NG", "accra": "GH",
    "addis ababa": "ET", "dar es salaam": "TZ", "kampala": "UG",
    "cape town": "ZA", "johannesburg": "ZA", "pretoria": "ZA",
    "beijing": "CN", "shanghai": "CN", "nanjing": "CN", "wuhan": "CN",
    "shenzhen": "CN", "tokyo": "JP", "kyoto": "JP", "osaka": "JP",
    "seoul": "KR", "taipei": "TW", "mumbai": "IN", "delhi": "IN",
    "bangalore": "IN", "chennai": "IN", "kolkata": "IN", "lahore": "PK",
    "islamabad": "PK", "karachi": "PK", "dhaka": "BD", "jakarta": "ID",
    "bandung": "ID", "kuala lumpur": "MY", "bangkok": "TH", "hanoi": "VN",
    "manila": "PH",
    "sydney": "AU", "melbourne": "AU", "brisbane": "AU", "perth": "AU",
    "canberra": "AU", "auckland": "NZ", "wellington": "NZ",
    "sao paulo": "BR", "são paulo": "BR", "rio de janeiro": "BR",
    "brasilia": "BR", "buenos aires": "AR", "santiago": "CL",
    "bogota": "CO", "bogotá": "CO", "lima": "PE", "mexico city": "MX",
    "quito": "EC", "montevideo": "UY", "havana": "CU",
}

_KEYWORDS_BY_LENGTH = sorted(AFFILIATION_KEYWORDS, key=len, reverse=True)


def country_for_affiliation(affiliation: str) -> str | None:
    """Scan an affiliation string for a known location keyword.

    Longer keywords are tried first so that e.g. "Georgia Institute of
    Technology" resolves before the bare country name "Georgia".
    """
    text = affiliation.casefold()
    for keyword in _KEYWORDS_BY_LENGTH:
        if re.search(rf"(?<![a-z]){re.escape(keyword)}(?![a-z])", text):
            return AFFILIATION_KEYWORDS[keyword]
    return None
